"""Small synthetic coordination instances for benchmarks and oracles.

These bypass the geometric channel model: gains are drawn directly so a
dominant-interference regime can be dialed in (each interferer well above
the aggregate of all weaker ones), which is where the single-blanked-
neighbor rate bound is tight and exhaustive search stays affordable.
"""

from dataclasses import dataclass

import numpy as np

from .linkadapt import RadioConfig, default_amc_table, precompute_rate_triples
from .network import NeighborMap, ring_neighbor_map


@dataclass
class DeskInstance:
    """A complete per-RB coordination problem at enumeration scale."""

    neighbors: NeighborMap
    gains: list          # per sector k: (M_k, N, K) linear, serving at col k
    weights: list        # per sector k: (M_k,)
    radio: RadioConfig

    @property
    def K(self):
        return self.neighbors.K

    @property
    def N(self):
        return self.gains[0].shape[1]

    @property
    def M(self):
        return tuple(g.shape[0] for g in self.gains)

    def enumeration_budget_ok(self, cap_bits=14):
        return self.K <= cap_bits


def random_desk_instance(n_sectors=12, users_per_sector=2, n_rbs=2,
                         k_tilde=2, seed=0, edge_fraction=0.5,
                         snr_db=20.0, neighbors=None):
    """Dominant-interference random instance on a ring neighbor map.

    Serving gains are normalized to 1; each user's neighbor interferers
    form a decaying ladder (every rung 10..30x above the next), with
    `edge_fraction` of users getting a near-serving-strength dominant
    interferer. Non-neighbor sectors contribute a tiny positive floor.
    """
    rng = np.random.default_rng(seed)
    nmap = neighbors if neighbors is not None \
        else ring_neighbor_map(n_sectors, k_tilde)
    kt = nmap.k_tilde
    radio = RadioConfig(p_c_watts=1.0, p_n_watts=10 ** (-snr_db / 10.0))

    gains, weights = [], []
    for k in range(n_sectors):
        g = np.full((users_per_sector, n_rbs, n_sectors), 1e-6)
        g *= rng.uniform(0.5, 1.5, size=g.shape)
        for m in range(users_per_sector):
            for n in range(n_rbs):
                if kt == 0:
                    continue
                if rng.random() < edge_fraction:
                    top_db = rng.uniform(1.0, 6.0)      # cell edge
                else:
                    top_db = rng.uniform(12.0, 22.0)    # cell center
                ladder_db = top_db + np.concatenate(
                    [[0.0], np.cumsum(rng.uniform(10.0, 30.0, size=kt - 1))])
                order = rng.permutation(kt)
                g[m, n, nmap.nbr[k][order]] = 10 ** (-ladder_db / 10.0)
        g[:, :, k] = 1.0
        gains.append(g)
        weights.append(rng.uniform(0.5, 1.5, size=users_per_sector))
    return DeskInstance(neighbors=nmap, gains=gains, weights=weights,
                        radio=radio)


def instance_triples(inst, amc=None, margin_db=0.0):
    amc = amc or default_amc_table()
    return precompute_rate_triples(inst.gains, inst.radio, inst.neighbors,
                                   amc, margin_db)
