"""Distributed blanking coordination: per-(sector, RB) flow subproblems,
a projected-subgradient master over the blanking variables, rounding,
and certified gap reporting.

Each subproblem is the single-RB weighted-rate LP of one sector given
everyone's (possibly fractional) blanking levels. Its flow form:

  node 0          RB source, supply 1 - I_own
  nodes 1..M      users, supply 0
  nodes M+1..M+Kt neighbors, supply -I_nbr[j]
  node M+Kt+1     collector, supply -1 + I_own + sum(I_nbr)

  arcs  RB->user      cap 1  cost -w*r      (assignment)
        user->nbr     cap 1  cost -w*rtil   (credit for a blanked neighbor)
        user->coll    cap 1  cost 0         (slack)
        coll->nbr     cap 1  cost 0         (surplus)

The master consumes one dual per subproblem balance constraint: the
subgradient of the summed sector values with respect to I[k] is the
neighbors' credits minus the sector's own loss,
Lambda[k] = -lambda_own[k] + sum over neighbors of lambda_from[nbr -> k].
Node potentials supply these multipliers after fixing the collector
gauge to zero; validity is enforced by the subgradient inequality rather
than any sign convention (see tests).
"""

import threading
from dataclasses import dataclass, field

import numpy as np

from . import mcnf
from .fairsched import local_schedule
from .linkadapt import default_amc_table, precompute_rate_triples


@dataclass
class IcicConfig:
    n_iter: int = 5
    step_constant: float = 1.0    # delta = c / iteration_index
    rho: int = 1                  # execution period, sub-frames
    runs: int = 1                 # 1, or 2 for the zeroed-channel re-run
    quant_bits: int = 16          # message width for overhead accounting
    quantize_exchange: bool = False   # also quantize the exchanged values
    keep_best_rounding: bool = True
    normalize_weights: bool = True
    init_mode: str = "zeros"      # zeros | random
    init_seed: int = 0

    def __post_init__(self):
        if self.n_iter < 0:
            raise ValueError("n_iter must be >= 0 (0 skips the master)")
        if self.step_constant <= 0:
            raise ValueError("step constant must be positive")
        if self.rho < 1:
            raise ValueError("rho must be >= 1")
        if self.runs not in (1, 2):
            raise ValueError("runs must be 1 or 2")
        if self.quant_bits < 1:
            raise ValueError("quant_bits must be >= 1")
        if self.init_mode not in ("zeros", "random"):
            raise ValueError("init_mode must be zeros or random")


@dataclass
class SubproblemSolution:
    x: np.ndarray            # (M,)
    y: np.ndarray            # (M, K_tilde)
    phi: float
    lam_eq: float            # dual of the RB balance
    lam_nbr: np.ndarray      # (K_tilde,) duals of the neighbor constraints


@dataclass
class GapReport:
    p_relaxed: float                 # estimate used for the certified gap
    p_relaxed_final: float           # master value at the final iterate
    p_hat: float                     # rounded feasible bound objective
    gap_bound_percent: float
    binary_fraction: float
    binary_guarantee_percent: float
    gap_history: list = field(default_factory=list)     # per iteration
    p_hat_history: list = field(default_factory=list)


@dataclass
class OverheadReport:
    r_distributed_bps: float
    r_centralized_bps: float
    ratio: float
    simulated_values: int = 0
    simulated_bits: int = 0


@dataclass
class IcicResult:
    blanking: np.ndarray             # (K, N) binary
    assignments: list                # per sector (M, N) int8
    exact_rates: list                # per sector (M, N) kbit/s
    realized_objective: float        # exact-rate weighted sum
    gap: GapReport
    overhead: OverheadReport
    warm_start: np.ndarray           # final fractional iterate (K, N)


@dataclass
class CoordinationProblem:
    """Everything one coordinated scheduling round needs."""

    neighbors: object                # NeighborMap
    weights: list                    # per sector (M_k,)
    gains: list                      # per sector (M_k, N, K)
    radio: object                    # RadioConfig
    amc: object = None
    margin_db: float = 0.0
    triples: object = None

    def __post_init__(self):
        if self.amc is None:
            self.amc = default_amc_table()
        if self.triples is None:
            self.triples = precompute_rate_triples(
                self.gains, self.radio, self.neighbors, self.amc,
                self.margin_db)

    @property
    def K(self):
        return self.neighbors.K

    @property
    def N(self):
        return self.gains[0].shape[1]


def problem_from_instance(inst, amc=None, margin_db=0.0):
    return CoordinationProblem(neighbors=inst.neighbors, weights=inst.weights,
                               gains=inst.gains, radio=inst.radio, amc=amc,
                               margin_db=margin_db)


# --- subproblem construction and duals ---

def build_subproblem_network(own_blank, nbr_blank, weights, r, rtil):
    """Flow instance for one (sector, RB) pair.

    own_blank: scalar I of this sector; nbr_blank: (K_tilde,) neighbor
    levels; weights: (M,); r: (M,) all-on rates; rtil: (M, K_tilde).
    """
    m = weights.shape[0]
    kt = nbr_blank.shape[0]
    supply = np.zeros(m + kt + 2)
    supply[0] = 1.0 - own_blank
    supply[m + 1:m + 1 + kt] = -nbr_blank
    supply[m + kt + 1] = -1.0 + own_blank + nbr_blank.sum()
    net = mcnf.FlowNetwork(supply=supply)
    coll = m + kt + 1
    for i in range(m):
        net.add_arc(0, 1 + i, 1.0, -weights[i] * r[i])
    for i in range(m):
        for j in range(kt):
            net.add_arc(1 + i, m + 1 + j, 1.0, -weights[i] * rtil[i, j])
    for i in range(m):
        net.add_arc(1 + i, coll, 1.0, 0.0)
    for j in range(kt):
        net.add_arc(coll, m + 1 + j, 1.0, 0.0)
    return net


def subproblem_objective(weights, r, rtil, x, y):
    """Shared evaluator so solver and enumeration agree bit for bit."""
    return float(np.dot(weights, x * r) + np.sum(weights[:, None] * y * rtil))


def solve_subproblem(own_blank, nbr_blank, weights, r, rtil):
    """Optimal (x, y), value, and balance duals for one (sector, RB)."""
    m = weights.shape[0]
    kt = nbr_blank.shape[0]
    net = build_subproblem_network(own_blank, nbr_blank, weights, r, rtil)
    sol = mcnf.solve(net)     # slack arcs keep this feasible for I in [0,1]
    x = sol.flow[:m].copy()
    y = sol.flow[m:m + m * kt].reshape(m, kt).copy()
    pi = sol.potential
    coll = m + kt + 1
    lam_eq = float(pi[coll] - pi[0])
    lam_nbr = np.maximum(pi[m + 1:m + 1 + kt] - pi[coll], 0.0)
    return SubproblemSolution(x=x, y=y,
                              phi=subproblem_objective(weights, r, rtil, x, y),
                              lam_eq=lam_eq, lam_nbr=lam_nbr)


def compute_subgradient(lam_eq, lam_nbr, neighbors):
    """Assemble the master subgradient from all sectors' duals.

    lam_eq: (K, N); lam_nbr: (K, N, K_tilde) in neighbor-position order.
    """
    k_sec, n_rb = lam_eq.shape
    grad = -lam_eq.copy()
    for k in range(k_sec):
        inc = neighbors.incoming(k)
        if len(inc) != neighbors.k_tilde:
            raise ValueError(f"sector {k}: missing neighbor duals")
        for a, pos in inc:
            grad[k] += lam_nbr[a, :, pos]
    return grad


def master_step(blanking, grad, iteration, step_constant):
    """One projected subgradient ascent step, elementwise clip to [0, 1]."""
    if iteration < 1:
        raise ValueError("iteration index is 1-based")
    return np.clip(blanking + (step_constant / iteration) * grad, 0.0, 1.0)


def round_blanking(blanking):
    """Nearest binary point; exact halves round up."""
    return np.floor(np.asarray(blanking) + 0.5).astype(np.int8)


def bound_objective(weights, triples, blanking, neighbors):
    """Bound-problem value of a binary blanking with optimal local picks.

    For each live (sector, RB): the best user counting the single
    strongest blanked neighbor's extra rate.
    """
    blanking = np.asarray(blanking)
    total = 0.0
    for k in range(neighbors.K):
        if neighbors.k_tilde:
            nbr_rows = blanking[neighbors.nbr[k]]      # (K_tilde, N)
            credit = (triples.rtil[k] * nbr_rows.T[None, :, :]).max(axis=2)
        else:
            credit = 0.0
        val = (triples.r[k] + credit) * weights[k][:, None]
        live = blanking[k] == 0
        if np.any(live):
            total += float(val[:, live].max(axis=0).sum())
    return total


def finalize_schedule(gains, weights, radio, amc, blanking, margin_db=0.0):
    """Exact rates under a binary blanking, then the per-sector argmax rule.

    Returns (assignments, rates, objective); identical code path to the
    uncoordinated scheduler, so forcing blanking to zero reproduces it
    bit for bit.
    """
    blanking = np.asarray(blanking)
    on = 1.0 - blanking.T.astype(float)                # (N, K)
    assignments, rates_out = [], []
    objective = 0.0
    for k, g in enumerate(gains):
        interf = np.einsum("mnk,nk->mn", g, on) \
            - g[:, :, k] * on[None, :, k]
        sinr = radio.p_c_watts * g[:, :, k] \
            / (radio.p_c_watts * interf + radio.p_n_watts)
        rates = amc.rate_linear(sinr, margin_db)
        assign = local_schedule(weights[k], rates, blanking[k])
        assignments.append(assign)
        rates_out.append(rates)
        objective += float(np.sum(weights[k][:, None] * assign * rates))
    return assignments, rates_out, objective


# --- the simulated sector exchange ---

class Mailbox:
    """Per-sector inbox; producers may post concurrently."""

    def __init__(self):
        self._lock = threading.Lock()
        self._msgs = []

    def post(self, sender, payload):
        with self._lock:
            self._msgs.append((sender, payload))

    def drain(self):
        with self._lock:
            msgs, self._msgs = self._msgs, []
        return msgs


class ExchangeLog:
    def __init__(self, quant_bits, quantize=False):
        self.values = 0
        self.quant_bits = quant_bits
        self.quantize = quantize

    def count(self, n_values):
        self.values += int(n_values)

    @property
    def bits(self):
        return self.values * self.quant_bits


def _quantize(values, bits, vmax=None):
    """Uniform block quantization to 2^bits - 1 levels over [0, vmax]."""
    v = np.asarray(values, dtype=float)
    scale = float(np.max(np.abs(v))) if vmax is None else vmax
    if scale <= 0:
        return np.zeros_like(v)
    levels = 2 ** bits - 1
    return np.round(v / scale * levels) * (scale / levels)


def _subgradient_pass(problem, weights, blanking, boxes, log, seen=None):
    """One master iteration body: solve, exchange duals, return the
    per-sector ascent directions and the summed master value.

    `seen` carries the blanking levels as neighbors observe them (they
    differ from `blanking` only when exchanged values are quantized).
    """
    k_sec, n_rb = problem.K, problem.N
    nmap = problem.neighbors
    seen = blanking if seen is None else seen
    quantize = getattr(log, "quantize", False)
    lam_eq = np.zeros((k_sec, n_rb))
    master_value = 0.0
    xy = []
    for k in range(k_sec):
        nbr_rows = seen[nmap.nbr[k]]
        lam_out = np.zeros((nmap.k_tilde, n_rb))
        sols = []
        for n in range(n_rb):
            s = solve_subproblem(blanking[k, n], nbr_rows[:, n], weights[k],
                                 problem.triples.r[k][:, n],
                                 problem.triples.rtil[k][:, n, :])
            lam_eq[k, n] = s.lam_eq
            lam_out[:, n] = s.lam_nbr
            master_value += s.phi
            sols.append(s)
        xy.append(sols)
        for pos, dest in enumerate(nmap.nbr[k]):
            payload = _quantize(lam_out[pos], log.quant_bits) if quantize \
                else lam_out[pos]
            boxes[dest].post(k, ("lam", payload))
            log.count(n_rb)
    grad = np.zeros((k_sec, n_rb))
    for k in range(k_sec):
        incoming = {sender: payload[1] for sender, payload in boxes[k].drain()}
        if set(incoming) != set(nmap.nbr[k].tolist()):
            raise RuntimeError(f"sector {k}: incomplete dual exchange")
        grad[k] = -lam_eq[k] + sum(incoming[a] for a in nmap.nbr[k])
    return grad, master_value, xy


def _binary_fraction(xy, blanking, tol=1e-6):
    at_bound = 0
    total = 0
    for sols in xy:
        for s in sols:
            vals = np.concatenate([s.x, s.y.ravel()])
            at_bound += int(np.sum((np.abs(vals) < tol)
                                   | (np.abs(1.0 - vals) < tol)))
            total += vals.size
    b = np.asarray(blanking).ravel()
    at_bound += int(np.sum((np.abs(b) < tol) | (np.abs(1.0 - b) < tol)))
    total += b.size
    return at_bound / total


def _subgradient_run(problem, weights, config, init, frozen=None):
    """Run the master loop; returns (final I, iterate values, rounded
    candidates [(I_star, bound value)], exchange log)."""
    k_sec, n_rb = problem.K, problem.N
    nmap = problem.neighbors
    log = ExchangeLog(config.quant_bits, config.quantize_exchange)
    boxes = [Mailbox() for _ in range(k_sec)]
    blanking = init.copy()
    if frozen is not None:
        blanking[frozen] = 1.0

    def as_seen(i_mat):
        if not config.quantize_exchange:
            return i_mat
        return _quantize(i_mat, config.quant_bits, vmax=1.0)

    def rounded_candidate(i_frac):
        i_star = round_blanking(i_frac)
        return i_star, bound_objective(weights, problem.triples, i_star, nmap)

    candidates = [rounded_candidate(blanking)]
    values = []
    xy_last = None
    seen = as_seen(blanking)
    for p in range(1, config.n_iter + 1):
        grad, value, xy_last = _subgradient_pass(
            problem, weights, blanking, boxes, log, seen=seen)
        values.append(value)
        blanking = master_step(blanking, grad, p, config.step_constant)
        if frozen is not None:
            blanking[frozen] = 1.0
        seen = as_seen(blanking)
        for k in range(k_sec):
            for dest in nmap.nbr[k]:
                boxes[dest].post(k, ("I", seen[k]))
                log.count(n_rb)
        for k in range(k_sec):
            boxes[k].drain()     # views refresh from the shared matrix
        candidates.append(rounded_candidate(blanking))
    if config.n_iter > 0:
        _, final_value, xy_last = _subgradient_pass(
            problem, weights, blanking,
            [Mailbox() for _ in range(k_sec)],
            ExchangeLog(config.quant_bits), seen=seen)   # bookkeeping only
        values.append(final_value)
    else:
        values.append(candidates[0][1])
    return blanking, values, candidates, xy_last, log


def run_coordination(problem, config, warm_start=None):
    """Full coordinated round: subgradient master, rounding, local
    scheduling with exact rates, gap and overhead reports.

    warm_start: optional (K, N) fractional blanking from the previous
    execution; the default initial point is all zeros (reuse-1).
    """
    k_sec, n_rb = problem.K, problem.N
    nmap = problem.neighbors

    scale = 1.0
    weights = [np.asarray(w, dtype=float) for w in problem.weights]
    if config.normalize_weights:
        wr = [w[:, None] * r for w, r in zip(weights, problem.triples.r)]
        mean = float(np.mean(np.concatenate([v.ravel() for v in wr])))
        if mean > 0:
            scale = mean
            weights = [w / scale for w in weights]

    if warm_start is not None:
        init = np.clip(np.asarray(warm_start, dtype=float), 0.0, 1.0)
    elif config.init_mode == "random":
        init = np.random.default_rng(config.init_seed).random((k_sec, n_rb))
    else:
        init = np.zeros((k_sec, n_rb))

    final_i, values, candidates, xy_last, log = _subgradient_run(
        problem, weights, config, init)

    if config.runs == 2:
        blank1 = candidates[-1][0] if not config.keep_best_rounding \
            else max(candidates, key=lambda c: c[1])[0]
        masked = [g.copy() for g in problem.gains]
        for k in range(k_sec):
            off = blank1.astype(float).T[None, :, :]     # (1, N, K)
            masked[k] = masked[k] * (1.0 - off)
            masked[k][:, :, k] = problem.gains[k][:, :, k]
        problem2 = CoordinationProblem(
            neighbors=nmap, weights=problem.weights, gains=masked,
            radio=problem.radio, amc=problem.amc, margin_db=problem.margin_db)
        weights2 = [w.copy() for w in weights]
        frozen = blank1.astype(bool)
        final2, _, cands2, _, log2 = _subgradient_run(
            problem2, weights2, config, final_i, frozen=frozen)
        log.count(log2.values)
        # candidates from the re-run are re-scored on the true channel
        candidates += [(c[0], bound_objective(weights, problem.triples,
                                              c[0], nmap)) for c in cands2]

    if config.keep_best_rounding:
        i_star, p_hat = max(candidates, key=lambda c: c[1])
    else:
        i_star, p_hat = candidates[-1]

    p_hat_hist, best = [], -np.inf
    for _, v in candidates[:config.n_iter + 1]:
        best = max(best, v)
        p_hat_hist.append(best * scale)
    p_relaxed_final = values[-1]
    p_relaxed = max(max(values), max(v for _, v in candidates), p_hat)
    gap_hist = [100.0 * (p_relaxed - v / scale) / p_relaxed if p_relaxed > 0
                else 0.0 for v in p_hat_hist]

    gap = GapReport(
        p_relaxed=p_relaxed * scale,
        p_relaxed_final=p_relaxed_final * scale,
        p_hat=p_hat * scale,
        gap_bound_percent=optimality_gap(p_relaxed, p_hat)
        if p_relaxed > 0 else 0.0,
        binary_fraction=_binary_fraction(xy_last, final_i)
        if xy_last is not None else 1.0,
        binary_guarantee_percent=binary_share_guarantee(
            float(np.mean([w.shape[0] for w in weights])), nmap.k_tilde),
        gap_history=gap_hist,
        p_hat_history=p_hat_hist,
    )

    assignments, rates, objective = finalize_schedule(
        problem.gains, problem.weights, problem.radio, problem.amc, i_star,
        problem.margin_db)

    m_bar = float(np.mean([w.shape[0] for w in weights]))
    overhead = overhead_report(m_bar, nmap.k_tilde, n_rb, config)
    overhead.simulated_values = log.values
    overhead.simulated_bits = log.bits

    return IcicResult(blanking=i_star, assignments=assignments,
                      exact_rates=rates, realized_objective=objective,
                      gap=gap, overhead=overhead, warm_start=final_i)


# --- closed-form reports ---

def optimality_gap(p_relaxed, p_hat):
    """Certified gap percentage (upper bound on the true gap)."""
    if p_relaxed <= 0:
        raise ValueError(f"optimality gap undefined for p_relaxed={p_relaxed}")
    return 100.0 * (p_relaxed - p_hat) / p_relaxed


def binary_share_guarantee(m_bar, k_tilde):
    """Guaranteed percentage of relaxed variables at binary values."""
    if m_bar < 1 or k_tilde < 1:
        raise ValueError("need m_bar >= 1 and k_tilde >= 1")
    return 100.0 * k_tilde * (m_bar - 1) / ((k_tilde + 1) * m_bar + 1)


def overhead_report(m_per_sector, k_tilde, n_rbs, config):
    """Message-exchange rates for the distributed and centralized forms."""
    period_s = config.rho * 1e-3
    r_dist = 2.0 * config.n_iter * k_tilde * n_rbs * config.quant_bits \
        / period_s
    r_cent = n_rbs * m_per_sector * (k_tilde + 1) * config.quant_bits \
        / period_s
    ratio = m_per_sector * (k_tilde + 1) / (2.0 * k_tilde * config.n_iter) \
        if config.n_iter > 0 else np.inf
    return OverheadReport(r_distributed_bps=r_dist, r_centralized_bps=r_cent,
                          ratio=ratio)
