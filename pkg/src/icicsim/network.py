"""Multi-cell layout, channel drawing, and user association.

Sites sit on a triangular lattice and carry three sectors each with
boresights 120 degrees apart. Wraparound is a true torus: the site set is
a lattice cluster of size sites = i^2 + i*j + j^2 (1, 3, 4, 7, 9, 12, 13,
16, 19, ...) and distances are minimized over the 6 cluster translation
images, so every sector sees the same geometry.

The channel is a deliberately simple stand-in for a full stochastic
geometry model: log-distance pathloss A + B*log10(d), lognormal shadowing
with cross-site correlation, the standard parabolic sector antenna
pattern in azimuth and elevation, and optional i.i.d. Rayleigh fast
fading per RB. Everything is a pure function of (config, seed).
"""

import csv
import math
from dataclasses import dataclass

import numpy as np


BORESIGHTS_DEG = (30.0, 150.0, 270.0)


@dataclass(frozen=True)
class NetworkDims:
    K: int                        # sector count
    sites: int
    M: tuple                      # per-sector user counts
    N: int                        # RB count

    def __post_init__(self):
        object.__setattr__(self, "M", tuple(int(m) for m in self.M))
        if self.K < 1 or self.N < 1 or self.sites < 1:
            raise ValueError("K, N, sites must all be >= 1")
        if len(self.M) != self.K or any(m < 1 for m in self.M):
            raise ValueError("need one user count >= 1 per sector")
        if self.sites * 3 != self.K:
            raise ValueError(
                f"tri-sector layout needs K = 3*sites, got K={self.K} "
                f"sites={self.sites}")

    @classmethod
    def uniform(cls, sites, users_per_sector, n_rbs):
        k = 3 * sites
        return cls(K=k, sites=sites, M=(users_per_sector,) * k, N=n_rbs)


@dataclass
class Layout:
    site_xy: np.ndarray           # (sites, 2) meters
    sector_site: np.ndarray       # (K,) site index of each sector
    boresight_deg: np.ndarray     # (K,)
    isd: float
    tilt_deg: float
    wraparound: bool
    images: np.ndarray            # (n_images, 2) torus translation vectors

    def sector_xy(self):
        return self.site_xy[self.sector_site]

    def torus_delta(self, from_xy, to_xy):
        """Displacement from -> to through the nearest wraparound image.

        from_xy: (..., 2); to_xy: (..., 2); returns (..., 2).
        """
        delta = np.asarray(to_xy) - np.asarray(from_xy)
        cands = delta[..., None, :] + self.images          # (..., I, 2)
        d2 = np.sum(cands ** 2, axis=-1)
        best = np.argmin(d2, axis=-1)
        return np.take_along_axis(
            cands, best[..., None, None], axis=-2).squeeze(-2)

    def torus_distance(self, from_xy, to_xy):
        return np.linalg.norm(self.torus_delta(from_xy, to_xy), axis=-1)


def _cluster_shape(sites):
    """Find lattice indices (i, j) with i^2 + i*j + j^2 = sites."""
    for i in range(0, 12):
        for j in range(0, i + 1):
            if i * i + i * j + j * j == sites:
                return max(i, j), min(i, j)
    raise ValueError(
        f"{sites} sites cannot tile a wraparound layout; use a count of the "
        f"form i^2+ij+j^2 (1, 3, 4, 7, 9, 12, 13, 16, 19, 21, 25, ...)")


def generate_layout(dims, isd, seed=0, tilt_deg=12.0, wraparound=True):
    """Hexagonal-lattice site cluster with tri-sector boresights.

    Deterministic: the seed is accepted for interface symmetry but the
    geometry itself has no random component.
    """
    if isd <= 0:
        raise ValueError("inter-site distance must be positive")
    if dims.K % 3 != 0:
        raise ValueError("tri-sector mode needs K divisible by 3")
    i, j = _cluster_shape(dims.sites)

    a1 = np.array([isd, 0.0])
    a2 = np.array([0.5 * isd, 0.5 * math.sqrt(3.0) * isd])
    t1 = i * a1 + j * a2
    # 60-degree rotation stays inside the lattice, giving the second
    # translation vector of the wraparound group
    rot = np.array([[0.5, -0.5 * math.sqrt(3.0)],
                    [0.5 * math.sqrt(3.0), 0.5]])
    t2 = rot @ t1

    # lattice points inside the fundamental parallelogram of (t1, t2)
    basis = np.column_stack([t1, t2])
    inv = np.linalg.inv(basis)
    pts = []
    span = i + j + 2
    for u in range(-span, span + 1):
        for v in range(-span, span + 1):
            p = u * a1 + v * a2
            s, t = inv @ p
            if -1e-9 <= s < 1 - 1e-9 and -1e-9 <= t < 1 - 1e-9:
                pts.append(p)
    if len(pts) != dims.sites:
        raise AssertionError(
            f"cluster enumeration found {len(pts)} sites, expected {dims.sites}")
    site_xy = np.array(sorted(pts, key=lambda p: (round(p[1], 6), round(p[0], 6))))

    sector_site = np.repeat(np.arange(dims.sites), 3)
    boresight = np.tile(np.array(BORESIGHTS_DEG), dims.sites)

    if wraparound:
        images = [np.zeros(2)]
        vec = t1.copy()
        for _ in range(6):
            images.append(vec.copy())
            vec = rot @ vec
        images = np.array(images)
    else:
        images = np.zeros((1, 2))

    return Layout(site_xy=site_xy, sector_site=sector_site,
                  boresight_deg=boresight, isd=float(isd),
                  tilt_deg=float(tilt_deg), wraparound=wraparound,
                  images=images)


def antenna_gain(theta_deg, phi_deg, tilt_deg):
    """Combined sector pattern in dB (boresight gain applied separately).

    Azimuth: -min(12*(theta/70)^2, 20); elevation: -min(12*((phi-tilt)/15)^2, 20);
    combined: -min(-(A + A_e), 20).
    """
    theta = np.abs(((np.asarray(theta_deg, dtype=float) + 180.0) % 360.0) - 180.0)
    a_h = -np.minimum(12.0 * (theta / 70.0) ** 2, 20.0)
    a_v = -np.minimum(12.0 * ((np.asarray(phi_deg, dtype=float) - tilt_deg)
                              / 15.0) ** 2, 20.0)
    return -np.minimum(-(a_h + a_v), 20.0)


@dataclass(frozen=True)
class ChannelConfig:
    """Large-scale model knobs; defaults follow urban-macro practice."""

    pathloss_a_db: float = 15.3
    pathloss_b_db: float = 37.6           # dB per decade of distance
    shadowing_sigma_db: float = 8.0
    shadowing_cross_corr: float = 0.5     # across sites, same user
    bs_height_m: float = 25.0
    ut_height_m: float = 1.5
    min_bs_dist_m: float = 25.0
    boresight_gain_dbi: float = 17.0
    feeder_loss_db: float = 2.0
    fast_fading: bool = True


@dataclass
class NeighborMap:
    """Symmetric fixed-cardinality interferer sets per sector."""

    nbr: np.ndarray       # (K, K_tilde) int

    def __post_init__(self):
        self.nbr = np.asarray(self.nbr, dtype=int)
        k, kt = self.nbr.shape
        sets = [set(row.tolist()) for row in self.nbr]
        for a in range(k):
            if len(sets[a]) != kt or a in sets[a]:
                raise ValueError(f"sector {a}: bad neighbor row {self.nbr[a]}")
            for b in self.nbr[a]:
                if a not in sets[b]:
                    raise ValueError(f"neighbor relation not symmetric: "
                                     f"{b} in {a}'s set but not conversely")
        self._incoming = [[] for _ in range(k)]
        for a in range(k):
            for pos, b in enumerate(self.nbr[a]):
                self._incoming[b].append((a, pos))

    @property
    def K(self):
        return self.nbr.shape[0]

    @property
    def k_tilde(self):
        return self.nbr.shape[1]

    def incoming(self, k):
        """Pairs (a, pos) with nbr[a][pos] == k; by symmetry one per neighbor."""
        return self._incoming[k]


def ring_neighbor_map(num_sectors, k_tilde):
    """Circulant neighbor sets: offsets +-1..+-(kt//2), plus K/2 if odd."""
    if k_tilde >= num_sectors:
        raise ValueError("k_tilde must be < number of sectors")
    offs = []
    for d in range(1, k_tilde // 2 + 1):
        offs += [d, -d]
    if k_tilde % 2 == 1:
        if num_sectors % 2 != 0:
            raise ValueError("odd k_tilde on a ring needs an even sector count")
        offs.append(num_sectors // 2)
    rows = [sorted((k + o) % num_sectors for o in offs)
            for k in range(num_sectors)]
    return NeighborMap(nbr=np.array(rows))


def _coupling_scores(layout, mode):
    """Symmetric pairwise closeness score between sectors (higher = closer)."""
    k = layout.sector_site.shape[0]
    ref = layout.sector_xy() + (layout.isd / 3.0) * np.column_stack([
        np.cos(np.radians(layout.boresight_deg)),
        np.sin(np.radians(layout.boresight_deg))])
    score = np.full((k, k), -np.inf)
    for a in range(k):
        for b in range(a + 1, k):
            if mode == "nearest":
                s = -layout.torus_distance(ref[a], ref[b])
            else:  # strongest average coupling, pathloss + pattern, no shadowing
                s = (_mean_gain_db(layout, a, ref[b])
                     + _mean_gain_db(layout, b, ref[a]))
            score[a, b] = score[b, a] = s
    return score


def _mean_gain_db(layout, from_sector, to_xy):
    site = layout.site_xy[layout.sector_site[from_sector]]
    delta = layout.torus_delta(site, to_xy)
    d = max(np.linalg.norm(delta), 1.0)
    theta = math.degrees(math.atan2(delta[1], delta[0])) \
        - layout.boresight_deg[from_sector]
    return float(antenna_gain(theta, layout.tilt_deg, layout.tilt_deg)
                 - 37.6 * math.log10(d))


def neighbor_map(layout, k_tilde=6, mode="nearest"):
    """Symmetric K_tilde-regular neighbor sets from geometric coupling.

    Greedy b-matching on the coupling scores with a deterministic repair
    pass; raises if the requested regular relation cannot be completed.
    """
    k = layout.sector_site.shape[0]
    if k_tilde >= k:
        raise ValueError("k_tilde must be < number of sectors")
    score = _coupling_scores(layout, mode)
    order = sorted(((a, b) for a in range(k) for b in range(a + 1, k)),
                   key=lambda p: (-score[p], p))
    deg = np.zeros(k, dtype=int)
    adj = [set() for _ in range(k)]
    for a, b in order:
        if deg[a] < k_tilde and deg[b] < k_tilde:
            adj[a].add(b)
            adj[b].add(a)
            deg[a] += 1
            deg[b] += 1
    for _ in range(2 * k * k_tilde):
        short = [v for v in range(k) if deg[v] < k_tilde]
        if not short:
            break
        fixed = False
        for a in short:
            cands = [b for b in short if b != a and b not in adj[a]]
            if cands:
                b = max(cands, key=lambda v: (score[a, v], -v))
                adj[a].add(b)
                adj[b].add(a)
                deg[a] += 1
                deg[b] += 1
                fixed = True
                break
        if fixed:
            continue
        # deficient sectors are mutually exhausted: break an existing edge
        # (c, d) away from them and reconnect across it
        a = short[0]
        b = short[1] if len(short) > 1 else short[0]
        edges = sorted({(min(c, d), max(c, d))
                        for c in range(k) for d in adj[c]})
        done = False
        for c, d in sorted(edges, key=lambda e: score[e]):
            if {c, d} & {a, b}:
                continue
            for c2, d2 in ((c, d), (d, c)):
                if c2 not in adj[a] and d2 not in adj[b] \
                        and (a != b or c2 != d2):
                    adj[c2].discard(d2), adj[d2].discard(c2)
                    adj[a].add(c2), adj[c2].add(a)
                    adj[b].add(d2), adj[d2].add(b)
                    deg[a] += 1
                    deg[b] += 1
                    done = True
                    break
            if done:
                break
        if not done:
            raise ValueError(
                f"could not complete a symmetric {k_tilde}-regular "
                f"neighbor relation over {k} sectors")
    rows = [sorted(adj[v]) for v in range(k)]
    return NeighborMap(nbr=np.array(rows))


@dataclass
class ChannelTensor:
    """Linear power gains from every sector to every user, per RB.

    gains[k] has shape (M_k, N, K): user m of sector k, RB n, from sector j.
    large_scale[k] is (M_k, K) without fast fading (association view).
    """

    gains: list
    large_scale: list
    user_xy: list                 # (M_k, 2) per sector
    dims: object = None

    def export_csv(self, path):
        """Debug dump: rows m,n,k,k_tilde,gain_linear."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "n", "k", "k_tilde", "gain_linear"])
            for k, g in enumerate(self.gains):
                m_k, n_rb, n_sec = g.shape
                for m in range(m_k):
                    for n in range(n_rb):
                        for j in range(n_sec):
                            w.writerow([m, n, k, j, repr(float(g[m, n, j]))])


def _large_scale_gain_db(layout, cfg, user_xy, shadow_db):
    """(users, K) gains: pathloss + shadowing + antenna pattern + boresight."""
    k = layout.sector_site.shape[0]
    users = user_xy.shape[0]
    out = np.empty((users, k))
    sec_xy = layout.sector_xy()
    dh = cfg.bs_height_m - cfg.ut_height_m
    for j in range(k):
        delta = layout.torus_delta(sec_xy[j], user_xy)        # (users, 2)
        dist_h = np.maximum(np.linalg.norm(delta, axis=-1), 1.0)
        dist = np.hypot(dist_h, dh)
        theta = np.degrees(np.arctan2(delta[:, 1], delta[:, 0])) \
            - layout.boresight_deg[j]
        phi = np.degrees(np.arctan2(dh, dist_h))
        pattern = antenna_gain(theta, phi, layout.tilt_deg)
        pl = cfg.pathloss_a_db + cfg.pathloss_b_db * np.log10(dist)
        out[:, j] = (-pl + pattern + cfg.boresight_gain_dbi
                     - cfg.feeder_loss_db + shadow_db[:, layout.sector_site[j]])
    return out


def _draw_shadowing(rng, sigma, cross_corr, num_sites):
    common = rng.normal() * math.sqrt(cross_corr)
    per_site = rng.normal(size=num_sites) * math.sqrt(1.0 - cross_corr)
    return sigma * (common + per_site)


def associate_users(wideband_gains, radio):
    """Serving sector per user by highest wideband SINR (no fast fading).

    wideband_gains: (users, K) linear. Ties break to the lowest index.
    """
    g = np.asarray(wideband_gains, dtype=float)
    total = g.sum(axis=1, keepdims=True)
    sinr = g / (total - g + radio.p_n_watts / radio.p_c_watts)
    return np.argmax(sinr, axis=1)


def draw_channels(layout, dims, cfg, radio, seed, user_xy=None):
    """Drop users, draw shadowing and fading, and build the gain tensor.

    Users are drawn uniformly on the torus and kept when their best
    wideband-SINR sector still has quota, so the association invariant
    holds by construction. Deterministic for a given (config, seed).

    user_xy: optional list of (M_k, 2) arrays pinning user positions per
    sector (validated against the minimum BS distance).
    """
    rng = np.random.default_rng(seed)
    origin, t1, t2 = _drop_region(layout)
    sec_xy = layout.sector_xy()

    if user_xy is not None:
        placed = [np.asarray(u, dtype=float) for u in user_xy]
        for k, pts in enumerate(placed):
            if pts.shape != (dims.M[k], 2):
                raise ValueError(f"sector {k}: expected {dims.M[k]} positions")
            d = layout.torus_distance(pts[:, None, :], layout.site_xy[None, :, :])
            if np.any(d < cfg.min_bs_dist_m):
                raise ValueError(
                    f"user closer than {cfg.min_bs_dist_m} m to a site")
        if cfg.shadowing_sigma_db > 0:
            shadow = np.array([
                _draw_shadowing(rng, cfg.shadowing_sigma_db,
                                cfg.shadowing_cross_corr, dims.sites)
                for _ in range(sum(dims.M))])
        else:
            shadow = np.zeros((sum(dims.M), dims.sites))
        flat_xy = np.concatenate(placed, axis=0)
        owners = np.repeat(np.arange(dims.K), dims.M)
    else:
        quota = list(dims.M)
        flat_xy, shadow, owners = [], [], []
        attempts = 0
        max_attempts = 4000 * sum(dims.M)
        while any(q > 0 for q in quota):
            attempts += 1
            if attempts > max_attempts:
                raise RuntimeError("user drop did not converge; check quotas")
            s, t = rng.random(2)
            pos = origin + s * t1 + t * t2
            if np.min(layout.torus_distance(pos, layout.site_xy)) \
                    < cfg.min_bs_dist_m:
                continue
            sh = _draw_shadowing(rng, cfg.shadowing_sigma_db,
                                 cfg.shadowing_cross_corr, dims.sites) \
                if cfg.shadowing_sigma_db > 0 else np.zeros(dims.sites)
            g_db = _large_scale_gain_db(layout, cfg, pos[None, :], sh[None, :])
            best = int(associate_users(10 ** (g_db / 10.0), radio)[0])
            if quota[best] <= 0:
                continue
            quota[best] -= 1
            flat_xy.append(pos)
            shadow.append(sh)
            owners.append(best)
        flat_xy = np.array(flat_xy)
        shadow = np.array(shadow)
        owners = np.array(owners)

    g_db = _large_scale_gain_db(layout, cfg, flat_xy, shadow)
    g_lin = 10 ** (g_db / 10.0)

    gains, large, xy = [], [], []
    for k in range(dims.K):
        rows = np.nonzero(owners == k)[0]
        ls = g_lin[rows]                                       # (M_k, K)
        if cfg.fast_fading:
            fad = rng.exponential(size=(rows.size, dims.N, dims.K))
        else:
            fad = np.ones((rows.size, dims.N, dims.K))
        gains.append(ls[:, None, :] * fad)
        large.append(ls)
        xy.append(flat_xy[rows])
    return ChannelTensor(gains=gains, large_scale=large, user_xy=xy, dims=dims)


def refade(tensor, dims, rng):
    """Redraw fast fading on top of the existing large-scale gains."""
    gains = [ls[:, None, :] * rng.exponential(size=(ls.shape[0], dims.N, dims.K))
             for ls in tensor.large_scale]
    return ChannelTensor(gains=gains, large_scale=tensor.large_scale,
                         user_xy=tensor.user_xy, dims=dims)


def _drop_region(layout):
    """(origin, v1, v2) spanning the user drop area."""
    if layout.wraparound and layout.images.shape[0] > 1:
        return np.zeros(2), layout.images[1], layout.images[2]
    # non-wrapped: the site bounding box with one ISD of margin
    lo = layout.site_xy.min(axis=0) - layout.isd
    hi = layout.site_xy.max(axis=0) + layout.isd
    return lo, np.array([hi[0] - lo[0], 0.0]), np.array([0.0, hi[1] - lo[1]])
