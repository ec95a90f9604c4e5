"""Per-sector fairness state and the local scheduling rule.

Average rates run through an exponentially-weighted low-pass filter with
window t_c; weights follow either the alpha-fair family (w = Rbar^-alpha)
or the linear mode (w = max(beta - Rbar, 0)). The local rule assigns each
non-blanked RB to the user maximizing weight * rate, ties to the lowest
user index so regression runs are reproducible.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class WeightPolicy:
    mode: str = "alpha_fair"          # alpha_fair | linear
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.mode not in ("alpha_fair", "linear"):
            raise ValueError(f"unknown weight mode {self.mode!r}")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")


@dataclass
class AverageRateTracker:
    """EWMA of scheduled rates, floored so alpha > 0 weights stay finite."""

    num_users: int
    t_c: float = 100.0
    floor_eps: float = 1e-3
    rbar: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.t_c < 1:
            raise ValueError(f"averaging window t_c={self.t_c} must be >= 1")
        if self.floor_eps <= 0:
            raise ValueError("floor_eps must be positive")
        if self.rbar is None:
            self.rbar = np.full(self.num_users, self.floor_eps)

    def update(self, scheduled_rate):
        """Fold one sub-frame of scheduled rates (kbit/s) into the average."""
        r = np.asarray(scheduled_rate, dtype=float)
        if np.any(r < 0):
            raise ValueError("scheduled rates must be nonnegative")
        a = 1.0 / self.t_c
        self.rbar = np.maximum((1.0 - a) * self.rbar + a * r, self.floor_eps)
        return self


def compute_weights(policy, tracker):
    """Marginal-utility weights from the current average rates."""
    if policy.mode == "alpha_fair":
        if policy.alpha == 0:
            return np.ones_like(tracker.rbar)
        return tracker.rbar ** (-policy.alpha)
    return np.maximum(policy.beta - tracker.rbar, 0.0)


def local_schedule(weights, rates, blanking):
    """Assign each non-blanked RB to argmax_m weights[m] * rates[m, n].

    weights: (M,), rates: (M, N), blanking: (N,) with 1 = RB unused.
    Returns a binary (M, N) assignment with column sums 1 - blanking.
    """
    weights = np.asarray(weights, dtype=float)
    rates = np.asarray(rates, dtype=float)
    blanking = np.asarray(blanking)
    m, n = rates.shape
    assign = np.zeros((m, n), dtype=np.int8)
    scores = weights[:, None] * rates
    winners = np.argmax(scores, axis=0)      # first maximum = lowest index
    cols = np.nonzero(blanking == 0)[0]
    assign[winners[cols], cols] = 1
    return assign
