"""Scenario configuration, the drop/sub-frame Monte Carlo loop, static
reuse baselines, metrics, and CSV emission.

The loop per drop: draw a channel (positions, shadowing, fading), then
per sub-frame update fairness weights, run the selected scheme (the
coordinated one every rho sub-frames, holding its blanking in between,
or a static reuse pattern), realize exact rates, and fold the scheduled
rates back into the averages. Every random draw descends from the single
configured seed, so identical configs produce identical output bytes.
"""

import hashlib
import math
import os
from dataclasses import dataclass, field, fields

import numpy as np

from . import network as nw
from .coordinator import (CoordinationProblem, IcicConfig, finalize_schedule,
                          overhead_report, run_coordination)
from .fairsched import AverageRateTracker, WeightPolicy, compute_weights
from .linkadapt import RadioConfig, default_amc_table


class ConfigError(ValueError):
    """Bad harness configuration; message carries the offending line."""


@dataclass
class ScenarioConfig:
    sites: int = 4
    users_per_sector: int = 2
    rbs: int = 6
    isd_m: float = 500.0
    shadowing_sigma_db: float = 8.0
    shadowing_cross_corr: float = 0.5
    pathloss_a_db: float = 15.3
    pathloss_b_db: float = 37.6
    drops: int = 2
    subframes: int = 50
    t_c: float = 100.0
    seed: int = 1
    total_bs_power_dbm: float = 46.0
    noise_per_rb_dbm: float = -114.45
    bandwidth_hz: float = 10e6
    k_tilde: int = 6
    neighbor_mode: str = "nearest"
    fast_fading: bool = True
    refade_each_subframe: bool = True
    estimation_delay_subframes: int = 0
    sinr_margin_db: float = 0.0
    min_bs_dist_m: float = 25.0
    tilt_deg: float = 12.0
    wraparound: bool = True

    def validate(self):
        if self.drops < 1 or self.subframes < 1:
            raise ConfigError("drops and subframes must be >= 1")
        if self.rbs < 1 or self.sites < 1 or self.users_per_sector < 1:
            raise ConfigError("rbs, sites, users_per_sector must be >= 1")
        if self.estimation_delay_subframes < 0:
            raise ConfigError("estimation delay must be >= 0")


@dataclass
class MetricsConfig:
    percentiles: tuple = (5.0, 50.0, 95.0)
    rmin_grid: tuple = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07)

    def validate(self):
        if any(not 0.0 < p < 100.0 for p in self.percentiles):
            raise ConfigError("percentiles must lie strictly inside (0, 100)")


@dataclass
class SimConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    scheduler: WeightPolicy = field(default_factory=WeightPolicy)
    icic: IcicConfig = field(default_factory=IcicConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    scheme: str = "proposed"       # proposed | reuse1 | reuse3 | pfr

    def validate(self):
        self.scenario.validate()
        self.metrics.validate()
        if self.scheme not in ("proposed", "reuse1", "reuse3", "pfr"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")

    def radio(self):
        p_total = 10 ** ((self.scenario.total_bs_power_dbm - 30.0) / 10.0)
        p_n = 10 ** ((self.scenario.noise_per_rb_dbm - 30.0) / 10.0)
        return RadioConfig(p_c_watts=p_total / self.scenario.rbs,
                           p_n_watts=p_n,
                           bandwidth_hz=self.scenario.bandwidth_hz)

    def canonical_text(self):
        parts = []
        for section, obj in (("scenario", self.scenario),
                             ("scheduler", self.scheduler),
                             ("icic", self.icic),
                             ("metrics", self.metrics)):
            for f in fields(obj):
                parts.append(f"{section}.{f.name} = {getattr(obj, f.name)!r}")
        parts.append(f"run.scheme = {self.scheme!r}")
        return "\n".join(parts) + "\n"


_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


def _convert(raw, kind, where):
    try:
        if kind is bool:
            return _BOOL[raw.strip().lower()]
        if kind is tuple:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return kind(raw.strip())
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r}") from exc


def parse_config(text, path="<config>"):
    """Line-oriented `section.key = value`; unknown keys are hard errors."""
    cfg = SimConfig()
    sections = {"scenario": cfg.scenario, "scheduler": cfg.scheduler,
                "icic": cfg.icic, "metrics": cfg.metrics}
    def _kind(ann):
        name = ann if isinstance(ann, str) else getattr(ann, "__name__", "")
        return {"tuple": tuple, "bool": bool, "int": int,
                "str": str}.get(name, float)

    typemap = {sec: {f.name: _kind(f.type) for f in fields(obj)}
               for sec, obj in sections.items()}

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        where = f"{path}:{lineno}"
        if "=" not in stripped:
            raise ConfigError(f"{where}: expected `section.key = value`")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key == "run.scheme":
            cfg.scheme = raw.strip()
            continue
        if "." not in key:
            raise ConfigError(f"{where}: key {key!r} has no section")
        sec, name = key.split(".", 1)
        if sec not in sections:
            raise ConfigError(f"{where}: unknown section {sec!r}")
        if name not in typemap[sec]:
            raise ConfigError(f"{where}: unknown key {key!r}")
        setattr(sections[sec], name, _convert(raw, typemap[sec][name], where))

    # re-run dataclass validation on the mutated objects
    try:
        cfg.scheduler.__post_init__()
        cfg.icic.__post_init__()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read(), path=path)


# --- static baselines ---

def _band_sizes(total):
    base, rem = divmod(total, 3)
    return [base + 1] * rem + [base] * (3 - rem)


def baseline_reuse(pattern, num_sectors, n_rbs):
    """Static blanking for reuse-1, reuse-3, or partial frequency reuse.

    Classes follow the within-site sector index (k mod 3). Reuse-3 splits
    all RBs into three bands; PFR keeps the first ceil(0.6 N) RBs live
    everywhere and splits the rest reuse-3 style.
    """
    blanking = np.zeros((num_sectors, n_rbs), dtype=np.int8)
    if pattern == "reuse1":
        return blanking
    if pattern not in ("reuse3", "pfr"):
        raise ValueError(f"unknown reuse pattern {pattern!r}")
    if pattern == "reuse3":
        start, sizes = 0, _band_sizes(n_rbs)
        if n_rbs < 3:
            raise ValueError("reuse-3 needs at least 3 RBs")
        bands = []
        for s in sizes:
            bands.append(np.arange(start, start + s))
            start += s
    else:
        inner = math.ceil(0.6 * n_rbs)
        outer = n_rbs - inner
        if outer < 3:
            raise ValueError("pfr needs at least 3 RBs past the inner band")
        start, sizes = inner, _band_sizes(outer)
        bands = []
        for s in sizes:
            bands.append(np.arange(start, start + s))
            start += s
    for k in range(num_sectors):
        cls = k % 3
        for other in range(3):
            if other != cls:
                blanking[k, bands[other]] = 1
    return blanking


# --- metrics ---

@dataclass
class MetricsReport:
    throughput_bps_hz: np.ndarray       # pooled per (drop, user)
    user_sector: np.ndarray             # sector index per pooled user
    user_drop: np.ndarray
    percentiles: dict                   # percent -> bit/s/Hz
    sector_throughput: np.ndarray       # (drops, K) aggregate bit/s/Hz
    outage: list                        # (rmin, probability)
    blanked_pmf: np.ndarray             # (N+1,)
    gap_rows: list                      # dict rows: subframe metrics
    overhead: object                    # OverheadReport or None
    scheme: str = ""
    fairness_label: str = ""            # e.g. alpha=2.0 or beta=500
    config_text: str = ""
    seeds: tuple = ()

    def cdf(self):
        vals = np.sort(self.throughput_bps_hz.ravel())
        probs = np.arange(1, vals.size + 1) / max(vals.size, 1)
        return vals, probs


def _percentiles(values, percents):
    flat = np.sort(np.asarray(values).ravel())
    if flat.size == 0:
        return {p: 0.0 for p in percents}
    return {p: float(np.percentile(flat, p)) for p in percents}


def run_simulation(config):
    """Execute the configured Monte Carlo and aggregate the metrics."""
    config.validate()
    sc = config.scenario
    radio = config.radio()
    amc = default_amc_table()
    dims = nw.NetworkDims.uniform(sc.sites, sc.users_per_sector, sc.rbs)
    layout = nw.generate_layout(dims, sc.isd_m, tilt_deg=sc.tilt_deg,
                                wraparound=sc.wraparound)
    k_tilde = min(sc.k_tilde, dims.K - 1)
    nmap = nw.neighbor_map(layout, k_tilde, mode=sc.neighbor_mode)
    chcfg = nw.ChannelConfig(
        pathloss_a_db=sc.pathloss_a_db, pathloss_b_db=sc.pathloss_b_db,
        shadowing_sigma_db=sc.shadowing_sigma_db,
        shadowing_cross_corr=sc.shadowing_cross_corr,
        min_bs_dist_m=sc.min_bs_dist_m, fast_fading=sc.fast_fading)

    static = None
    if config.scheme != "proposed":
        static = baseline_reuse(config.scheme, dims.K, dims.N)

    throughput, user_sector, user_drop = [], [], []
    sector_thr = np.zeros((sc.drops, dims.K))
    blank_counts = np.zeros(dims.N + 1)
    gap_rows = []
    overhead = None

    for drop in range(sc.drops):
        root = np.random.SeedSequence(entropy=(sc.seed, drop))
        ch_seed, fade_seed = root.spawn(2)
        channel = nw.draw_channels(layout, dims, chcfg, radio,
                                   seed=ch_seed)
        fade_rng = np.random.default_rng(fade_seed)
        trackers = [AverageRateTracker(num_users=dims.M[k], t_c=sc.t_c)
                    for k in range(dims.K)]
        warm = None
        held = np.zeros((dims.K, dims.N), dtype=np.int8)
        history = []                      # stale tensors for the delay knob
        thr_sum = [np.zeros(dims.M[k]) for k in range(dims.K)]

        for t in range(sc.subframes):
            tensor = channel if (t == 0 or not sc.refade_each_subframe
                                 or not sc.fast_fading) \
                else nw.refade(channel, dims, fade_rng)
            history.append(tensor)
            delay = min(sc.estimation_delay_subframes, len(history) - 1)
            known = history[-1 - delay]
            if len(history) > sc.estimation_delay_subframes + 1:
                history.pop(0)

            weights = [compute_weights(config.scheduler, trackers[k])
                       for k in range(dims.K)]

            if config.scheme == "proposed":
                if t % config.icic.rho == 0:
                    problem = CoordinationProblem(
                        neighbors=nmap, weights=weights, gains=known.gains,
                        radio=radio, amc=amc, margin_db=sc.sinr_margin_db)
                    res = run_coordination(problem, config.icic,
                                           warm_start=warm)
                    warm = res.warm_start
                    held = res.blanking
                    overhead = res.overhead
                    gap_rows.append({
                        "drop": drop, "subframe": t,
                        "rb_set": f"0-{dims.N - 1}",
                        "p_relaxed": res.gap.p_relaxed,
                        "p_hat": res.gap.p_hat,
                        "gap_pct": res.gap.gap_bound_percent,
                        "binary_frac": res.gap.binary_fraction,
                        "prop1_bound": res.gap.binary_guarantee_percent})
                    for k in range(dims.K):
                        blank_counts[int(held[k].sum())] += 1
                blanking = held
            else:
                blanking = static
                if t == 0:
                    for k in range(dims.K):
                        blank_counts[int(blanking[k].sum())] += 1

            assigns, rates, _ = finalize_schedule(
                tensor.gains, weights, radio, amc, blanking,
                sc.sinr_margin_db)
            for k in range(dims.K):
                scheduled = (assigns[k] * rates[k]).sum(axis=1)
                trackers[k].update(scheduled)
                thr_sum[k] += scheduled

        for k in range(dims.K):
            user_thr = thr_sum[k] / sc.subframes * 1e3 / sc.bandwidth_hz
            throughput.extend(user_thr.tolist())
            user_sector.extend([k] * dims.M[k])
            user_drop.extend([drop] * dims.M[k])
            sector_thr[drop, k] = float(user_thr.sum())

    throughput = np.array(throughput)
    outage = [(float(rmin), float(np.mean(throughput < rmin)))
              for rmin in config.metrics.rmin_grid]
    pmf = blank_counts / blank_counts.sum() if blank_counts.sum() > 0 \
        else blank_counts
    if overhead is None:
        overhead = overhead_report(sc.users_per_sector, k_tilde, dims.N,
                                   config.icic)

    fairness = f"alpha={config.scheduler.alpha}" \
        if config.scheduler.mode == "alpha_fair" \
        else f"beta={config.scheduler.beta}"
    return MetricsReport(
        throughput_bps_hz=throughput,
        user_sector=np.array(user_sector),
        user_drop=np.array(user_drop),
        percentiles=_percentiles(throughput, config.metrics.percentiles),
        sector_throughput=sector_thr,
        outage=outage,
        blanked_pmf=pmf,
        gap_rows=gap_rows,
        overhead=overhead,
        scheme=config.scheme,
        fairness_label=fairness,
        config_text=config.canonical_text(),
        seeds=(sc.seed,),
    )


# --- CSV emission ---

def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit_reports(report, out_dir):
    """Write the metric CSVs plus a manifest with the config hash."""
    os.makedirs(out_dir, exist_ok=True)

    _write_rows(os.path.join(out_dir, "user_throughput.csv"),
                ["drop", "sector", "throughput_bps_hz"],
                zip(report.user_drop, report.user_sector,
                    report.throughput_bps_hz))

    vals, probs = report.cdf()
    _write_rows(os.path.join(out_dir, "cdf.csv"),
                ["throughput_bps_hz", "prob"], zip(vals, probs))

    # one fairness-setting point per run; sweep runs concatenate rows
    trade = []
    if report.throughput_bps_hz.size:
        flat = np.sort(report.throughput_bps_hz.ravel())
        trade.append((report.scheme, report.fairness_label,
                      float(np.percentile(flat, 5)),
                      float(np.percentile(flat, 50)),
                      float(np.percentile(flat, 95)),
                      float(report.sector_throughput.mean())))
    _write_rows(os.path.join(out_dir, "tradeoff.csv"),
                ["scheme", "fairness", "cell_edge_bps_hz", "median_bps_hz",
                 "cell_center_bps_hz", "aggregate_bps_hz"], trade)

    _write_rows(os.path.join(out_dir, "outage.csv"),
                ["rmin_bps_hz", "outage_prob"], report.outage)

    _write_rows(os.path.join(out_dir, "blanked_pmf.csv"),
                ["blanked_rbs", "prob"],
                enumerate(report.blanked_pmf))

    _write_rows(os.path.join(out_dir, "gaps.csv"),
                ["subframe", "rb_set", "p_relaxed", "p_hat", "gap_pct",
                 "binary_frac", "prop1_bound"],
                [(r["subframe"], r["rb_set"], r["p_relaxed"], r["p_hat"],
                  r["gap_pct"], r["binary_frac"], r["prop1_bound"])
                 for r in report.gap_rows])

    ov = report.overhead
    _write_rows(os.path.join(out_dir, "overhead.csv"),
                ["r_distributed_bps", "r_centralized_bps", "ratio",
                 "simulated_values", "simulated_bits"],
                [(ov.r_distributed_bps, ov.r_centralized_bps, ov.ratio,
                  ov.simulated_values, ov.simulated_bits)] if ov else [])

    digest = hashlib.sha256(report.config_text.encode()).hexdigest()
    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        fh.write(f"config_sha256 = {digest}\n")
        fh.write(f"seeds = {','.join(str(s) for s in report.seeds)}\n")
        fh.write("cdf_pooling = users pooled across drops\n")
        fh.write("--- config ---\n")
        fh.write(report.config_text)
    return sorted(os.listdir(out_dir))
