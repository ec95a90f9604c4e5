"""SINR and rate computations: exact values, blanking lower bounds, and
the per-(sector, user, RB) rate triples the coordinator consumes.

All channel gains are linear power gains. Blanking indicators are 1 when
a sector leaves the RB unused. The exact SINR sums interference over
every other sector; the bound only ever credits the removal of a single
blanked neighbor, which is what makes the downstream problem linear.

Masked sums are deliberate in the reference paths: the "bound is exact
when at most one neighbor blanks" cases must match bit for bit, so both
sides compute their denominator as a sum over the same index set instead
of subtracting terms from a precomputed total.
"""

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RadioConfig:
    """Per-RB transmit power, per-RB noise power (watts), total bandwidth."""

    p_c_watts: float
    p_n_watts: float
    bandwidth_hz: float = 10e6

    def __post_init__(self):
        if self.p_c_watts <= 0 or self.p_n_watts <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("powers and bandwidth must be positive")


class AmcTable:
    """Step function mapping SINR (dB) to rate (kbit/s).

    Rows are upper-inclusive intervals (low, high]. The table must tile
    (-inf, +inf) contiguously, rates must be nondecreasing, and the lowest
    interval must map to rate 0 so that zero SINR yields zero rate.
    """

    def __init__(self, rows):
        rows = sorted(rows, key=lambda r: r[1])
        lows = np.array([r[0] for r in rows])
        self.uppers = np.array([r[1] for r in rows])
        self.rates = np.array([r[2] for r in rows])
        if not np.isneginf(lows[0]) or not np.isposinf(self.uppers[-1]):
            raise ValueError("AMC table must cover (-inf, +inf)")
        if not np.allclose(lows[1:], self.uppers[:-1], rtol=0, atol=0):
            raise ValueError("AMC intervals must be contiguous and disjoint")
        if np.any(np.diff(self.rates) < 0):
            raise ValueError("AMC rates must be nondecreasing in SINR")
        if self.rates[0] != 0.0:
            raise ValueError("lowest AMC interval must map to rate 0")
        self.lows = lows

    def __len__(self):
        return len(self.rates)

    def rate_db(self, sinr_db):
        """Rate (kbit/s) for SINR in dB; scalar or array."""
        idx = np.searchsorted(self.uppers, sinr_db, side="left")
        return self.rates[idx]

    def rate_linear(self, sinr_linear, margin_db=0.0):
        """Rate (kbit/s) for linear SINR >= 0, optional margin back-off."""
        s = np.asarray(sinr_linear, dtype=float)
        db = np.full(s.shape, -np.inf)
        np.log10(s, out=db, where=s > 0)
        db = 10.0 * db - margin_db
        out = self.rates[np.searchsorted(self.uppers, db, side="left")]
        return float(out) if np.isscalar(sinr_linear) else out

    @classmethod
    def from_csv(cls, path):
        """Load rows `low_db,high_db,rate_kbps`; -inf/inf spelled out."""
        rows = []
        with open(path) as fh:
            for rec in csv.DictReader(fh):
                rows.append((float(rec["low_db"]), float(rec["high_db"]),
                             float(rec["rate_kbps"])))
        return cls(rows)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["low_db", "high_db", "rate_kbps"])
            for lo, hi, r in zip(self.lows, self.uppers, self.rates):
                w.writerow([repr(float(lo)), repr(float(hi)), repr(float(r))])


# 14-row default lookup. Two published rows were malformed (a gap at
# 9.9..9.5 and a mangled "14.8." bound); canonicalized to keep the
# contiguity invariant while preserving every printed rate.
DEFAULT_AMC_ROWS = [
    (-np.inf, -6.1, 0.0),
    (-6.1, -4.1, 35.3),
    (-4.1, -2.0, 56.4),
    (-2.0, -0.2, 92.4),
    (-0.2, 1.9, 131.4),
    (1.9, 3.8, 177.4),
    (3.8, 5.8, 223.1),
    (5.8, 8.5, 291.6),
    (8.5, 9.9, 388.4),
    (9.9, 12.5, 418.3),
    (12.5, 14.8, 544.3),
    (14.8, 16.1, 648.1),
    (16.1, 17.8, 721.7),
    (17.8, np.inf, 807.4),
]


def default_amc_table():
    return AmcTable(DEFAULT_AMC_ROWS)


def sinr_exact(gains, serving, blanking, radio):
    """Exact SINR for one user on one RB.

    gains: (K,) linear gains from every sector, serving included.
    serving: index of the serving sector.
    blanking: (K,) binary indicators (own entry ignored).
    """
    gains = np.asarray(gains, dtype=float)
    blanking = np.asarray(blanking)
    idx = [j for j in range(gains.shape[0]) if j != serving and not blanking[j]]
    interference = radio.p_c_watts * float(np.sum(gains[idx])) if idx else 0.0
    return radio.p_c_watts * gains[serving] / (interference + radio.p_n_watts)


def sinr_all_on(gains, serving, radio):
    """SINR when every sector transmits (no blanking anywhere)."""
    gains = np.asarray(gains, dtype=float)
    idx = [j for j in range(gains.shape[0]) if j != serving]
    interference = radio.p_c_watts * float(np.sum(gains[idx])) if idx else 0.0
    return radio.p_c_watts * gains[serving] / (interference + radio.p_n_watts)


def sinr_one_blanked(gains, serving, blanked, radio):
    """SINR when exactly one sector (`blanked`) leaves the RB unused."""
    gains = np.asarray(gains, dtype=float)
    idx = [j for j in range(gains.shape[0]) if j != serving and j != blanked]
    interference = radio.p_c_watts * float(np.sum(gains[idx])) if idx else 0.0
    return radio.p_c_watts * gains[serving] / (interference + radio.p_n_watts)


def sinr_bound(gains, serving, blanking, neighbors, radio):
    """Lower bound on the exact SINR: only the strongest blanked neighbor
    is credited as removed. Exact when at most one neighbor blanks."""
    base = sinr_all_on(gains, serving, radio)
    best = base
    for j in neighbors:
        if blanking[j]:
            cand = sinr_one_blanked(gains, serving, j, radio)
            if cand > best:
                best = cand
    return best


@dataclass
class RateTriples:
    """Cached rates: with everyone on, and the extra rate per blanked neighbor.

    r[k]     (M_k, N)          rate if all sectors use the RB
    rtil[k]  (M_k, N, K_tilde) additional rate if only that neighbor blanks
    """

    r: list = field(default_factory=list)
    rtil: list = field(default_factory=list)


def precompute_rate_triples(gains_per_sector, radio, neighbors, amc,
                            margin_db=0.0):
    """Build RateTriples from per-sector gain tensors.

    gains_per_sector: list over sectors k of arrays (M_k, N, K); column j
    holds the gain from sector j, so column k is the serving gain.
    neighbors: NeighborMap-like with .nbr (K, K_tilde) int array.
    """
    p_c, p_n = radio.p_c_watts, radio.p_n_watts
    triples = RateTriples()
    for k, g in enumerate(gains_per_sector):
        m_k, n_rb, n_sec = g.shape
        nbr = neighbors.nbr[k]
        others = np.ones(n_sec, dtype=bool)
        others[k] = False
        total_int = p_c * g[:, :, others].sum(axis=2)          # (M, N)
        gamma = p_c * g[:, :, k] / (total_int + p_n)
        r = amc.rate_linear(gamma, margin_db)
        rtil = np.empty((m_k, n_rb, len(nbr)))
        for pos, j in enumerate(nbr):
            mask = others.copy()
            mask[j] = False
            removed_int = p_c * g[:, :, mask].sum(axis=2)
            gamma_t = p_c * g[:, :, k] / (removed_int + p_n)
            rtil[:, :, pos] = amc.rate_linear(gamma_t, margin_db) - r
        triples.r.append(r)
        triples.rtil.append(rtil)
    return triples


def rate_bound(r, rtil, blanked_mask):
    """Bounded rate r + max over blanked neighbors of the extra rate.

    r: scalar or (M,) / (M, N); rtil: matching array with a trailing
    neighbor axis; blanked_mask: (K_tilde,) booleans.
    """
    rtil = np.asarray(rtil)
    gain = np.max(rtil * np.asarray(blanked_mask), axis=-1) \
        if rtil.shape[-1] else 0.0
    return r + gain
