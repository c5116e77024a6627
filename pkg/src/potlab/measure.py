"""Discrete Radon measures: construction, ball masses, growth constants, energy.

A measure is a finite weighted point cloud.  Balls are open everywhere
(``|p - x| < r``) and every "sup over r > 0" is taken over a geometric
:class:`RadiiGrid`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gamma as gamma_fn

MAX_CANTOR_GENERATION = 20
_CHUNK = 512


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2) / float(gamma_fn(n / 2))


def unit_ball_volume(n: int) -> float:
    return unit_sphere_area(n) / n


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted atoms ``points[i]`` with mass ``weights[i] > 0``.

    Build instances with :func:`build_measure` (or the generators below); the
    constructor trusts its inputs.
    """

    points: np.ndarray
    weights: np.ndarray
    total_mass: float = field(init=False)
    index: cKDTree = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "total_mass", math.fsum(self.weights))
        object.__setattr__(self, "index", cKDTree(self.points))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def diameter(self) -> float:
        """Diagonal of the bounding box of the atoms (an upper bound of the diameter)."""
        return float(np.linalg.norm(self.points.max(axis=0) - self.points.min(axis=0)))

    @property
    def spacing(self) -> float:
        """Median nearest-neighbour distance; 0 for a single atom."""
        if len(self) < 2:
            return 0.0
        d, _ = self.index.query(self.points, k=2)
        return float(np.median(d[:, 1]))

    def ball_indices(self, x, r: float) -> np.ndarray:
        """Sorted indices of atoms with ``|p - x| < r``."""
        x = np.asarray(x, dtype=float)
        # widen the tree query slightly, then apply the exact strict test
        cand = self.index.query_ball_point(x, r * (1 + 1e-12) + 1e-300)
        cand = np.sort(np.asarray(cand, dtype=np.intp))
        if cand.size == 0:
            return cand
        d = np.linalg.norm(self.points[cand] - x, axis=1)
        return cand[d < r]

    def box_indices(self, lo, hi) -> np.ndarray:
        """Sorted indices of atoms in the half-open box ``[lo, hi)``."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        c = 0.5 * (lo + hi)
        half = float(np.max(hi - lo)) / 2
        cand = self.index.query_ball_point(c, half * (1 + 1e-12) + 1e-300, p=np.inf)
        cand = np.sort(np.asarray(cand, dtype=np.intp))
        if cand.size == 0:
            return cand
        pts = self.points[cand]
        inside = np.all((pts >= lo) & (pts < hi), axis=1)
        return cand[inside]

    def dilated(self, factor: float, beta: float) -> "DiscreteMeasure":
        """Push-forward under ``x -> factor * x`` rescaled so that beta-growth is preserved."""
        return DiscreteMeasure(self.points * factor, self.weights * factor**beta)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
        }


def build_measure(points, weights) -> DiscreteMeasure:
    try:
        pts = np.asarray(points, dtype=float)
    except ValueError:
        raise ValueError("dimension mismatch: ragged point list") from None
    w = np.asarray(weights, dtype=float).ravel()
    if pts.size == 0 or w.size == 0:
        raise ValueError("empty measure")
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[0] != w.size:
        raise ValueError("dimension mismatch")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite point")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("invalid weight")
    return DiscreteMeasure(pts, w)


def measure_from_dict(doc: dict) -> DiscreteMeasure:
    pts = np.asarray(doc["points"], dtype=float)
    if pts.ndim != 2 or pts.shape[1] != int(doc["dim"]):
        raise ValueError("dimension mismatch")
    return build_measure(pts, doc["weights"])


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------

def lebesgue_on_box(box, resolution) -> DiscreteMeasure:
    """Midpoint discretization of Lebesgue measure on ``box = (lo, hi)``."""
    lo = np.atleast_1d(np.asarray(box[0], dtype=float))
    hi = np.atleast_1d(np.asarray(box[1], dtype=float))
    if lo.shape != hi.shape:
        raise ValueError("dimension mismatch")
    if np.any(hi <= lo):
        raise ValueError("degenerate box")
    n = lo.size
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (n,))
    if np.any(res < 1):
        raise ValueError("resolution must be >= 1")
    h = (hi - lo) / res
    axes = [lo[i] + (np.arange(res[i]) + 0.5) * h[i] for i in range(n)]
    grid = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grid], axis=1)
    w = np.full(pts.shape[0], float(np.prod(h)))
    return DiscreteMeasure(pts, w)


def cantor_measure(generation: int) -> DiscreteMeasure:
    """Middle-thirds Cantor measure: 2^g atoms at interval midpoints, mass 2^-g each."""
    g = int(generation)
    if g < 1:
        raise ValueError("generation must be >= 1")
    if g > MAX_CANTOR_GENERATION:
        raise ValueError("resource limit")
    left = np.zeros(1)
    for k in range(1, g + 1):
        left = np.concatenate([left, left + 2.0 * 3.0**-k])
    left.sort()
    pts = (left + 0.5 * 3.0**-g).reshape(-1, 1)
    return DiscreteMeasure(pts, np.full(pts.shape[0], 2.0**-g))


def point_mass(x=(0.0,), mass: float = 1.0) -> DiscreteMeasure:
    return build_measure(np.atleast_2d(np.asarray(x, dtype=float)), [mass])


def surface_measure(kind: str, dim: int, resolution: int, extent=1.0, seed: int = 0) -> DiscreteMeasure:
    """Quasi-uniform surface measures.

    ``sphere``: atoms on the sphere of radius ``extent`` with weights summing to its
    area.  ``hyperplane``: Lebesgue measure on ``{x_n = 0}`` over ``extent``, given
    as ``(lo, hi)`` or a scalar ``L`` meaning ``[-L, L]^{n-1}``.
    """
    n = int(dim)
    if n < 2:
        raise ValueError("surface measures need dim >= 2")
    if kind == "hyperplane":
        if np.isscalar(extent):
            lo, hi = [-float(extent)] * (n - 1), [float(extent)] * (n - 1)
        else:
            lo, hi = extent
        base = lebesgue_on_box((lo, hi), resolution)
        pts = np.hstack([base.points, np.zeros((len(base), 1))])
        return DiscreteMeasure(pts, base.weights.copy())
    if kind == "sphere":
        radius = float(extent)
        m = int(resolution)
        if n == 2:
            th = 2 * math.pi * (np.arange(m) + 0.5) / m
            u = np.stack([np.cos(th), np.sin(th)], axis=1)
        elif n == 3:
            k = np.arange(m) + 0.5
            z = 1 - 2 * k / m
            phi = math.pi * (1 + 5**0.5) * k
            s = np.sqrt(1 - z * z)
            u = np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
        else:
            u = np.random.default_rng(seed).standard_normal((m, n))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
        area = unit_sphere_area(n) * radius ** (n - 1)
        return DiscreteMeasure(radius * u, np.full(m, area / m))
    raise ValueError("unknown surface")


# --------------------------------------------------------------------------
# radii, ball masses, growth
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RadiiGrid:
    r_min: float
    r_max: float
    per_octave: int = 4
    radii: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.r_min > 0 and self.r_max >= self.r_min):
            raise ValueError("empty grid")
        if self.per_octave < 1:
            raise ValueError("per_octave must be >= 1")
        kmax = int(math.floor(self.per_octave * math.log2(self.r_max / self.r_min) + 1e-9))
        r = self.r_min * 2.0 ** (np.arange(kmax + 1) / self.per_octave)
        object.__setattr__(self, "radii", r)

    @classmethod
    def anchored(cls, r_max: float, r_min: float, per_octave: int = 4) -> "RadiiGrid":
        """Grid whose largest element is exactly ``r_max`` (up to rounding) and smallest >= ``r_min``."""
        if not (r_min > 0 and r_max >= r_min):
            raise ValueError("empty grid")
        m = int(math.floor(per_octave * math.log2(r_max / r_min) + 1e-9))
        return cls(r_max * 2.0 ** (-m / per_octave), r_max, per_octave)

    def __len__(self) -> int:
        return self.radii.size

    def __iter__(self):
        return iter(self.radii)


def _as_radii(radii) -> np.ndarray:
    r = radii.radii if isinstance(radii, RadiiGrid) else np.asarray(radii, dtype=float).ravel()
    if r.size == 0:
        raise ValueError("empty grid")
    return r


def ball_mass(mu: DiscreteMeasure, x, r: float) -> float:
    if r <= 0:
        raise ValueError("radius must be positive")
    idx = mu.ball_indices(x, r)
    return float(mu.weights[idx].sum())


def ball_mass_table(mu: DiscreteMeasure, centers: np.ndarray, radii) -> np.ndarray:
    """``table[i, k] = mu(B(centers[i], radii[k]))`` computed by sorted distances."""
    r = _as_radii(radii)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    out = np.empty((centers.shape[0], r.size))
    for s in range(0, centers.shape[0], _CHUNK):
        c = centers[s:s + _CHUNK]
        d = np.linalg.norm(c[:, None, :] - mu.points[None, :, :], axis=2)
        order = np.argsort(d, axis=1, kind="stable")
        ds = np.take_along_axis(d, order, axis=1)
        cw = np.concatenate([np.zeros((c.shape[0], 1)), np.cumsum(mu.weights[order], axis=1)], axis=1)
        for i in range(c.shape[0]):
            k = np.searchsorted(ds[i], r, side="left")
            out[s + i] = cw[i, k]
    return out


@dataclass
class GrowthReport:
    beta: float
    constant: float
    witness: tuple
    per_radius_sup: dict


def growth_constant(mu: DiscreteMeasure, beta: float, radii, centers=None) -> GrowthReport:
    """Estimate sup_{x, r} r^-beta mu(B_r(x)) over ``centers`` (default: atoms) and ``radii``."""
    r = _as_radii(radii)
    n = mu.dim
    if not (0 < beta <= n):
        raise ValueError("beta must lie in (0, n]")
    pts = mu.points if centers is None else np.atleast_2d(np.asarray(centers, dtype=float))
    table = ball_mass_table(mu, pts, r) * r[None, :] ** (-beta)
    i, k = np.unravel_index(int(np.argmax(table)), table.shape)
    center = pts[i].copy()
    # re-evaluate the witness through the index so that it reproduces exactly
    value = ball_mass(mu, center, float(r[k])) * float(r[k]) ** (-beta)
    sups = table.max(axis=0)
    sups[k] = max(sups[k], value)
    constant = float(sups.max())
    per_radius = {float(rr): float(v) for rr, v in zip(r, sups)}
    return GrowthReport(beta, constant, (center, float(r[k])), per_radius)


def growth_exponent(mu: DiscreteMeasure, radii) -> tuple[float, float]:
    """Least-squares slope of log sup_x mu(B_r(x)) against log r, with its R^2."""
    r = _as_radii(radii)
    if r.size < 4 or r[-1] / r[0] < 4 * (1 - 1e-12):
        raise ValueError("insufficient data: need >= 4 radii spanning >= 2 octaves")
    sup = ball_mass_table(mu, mu.points, r).max(axis=0)
    keep = sup > 0
    if keep.sum() < 2:
        raise ValueError("insufficient data")
    x, y = np.log(r[keep]), np.log(sup[keep])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / sst if sst > 0 else 1.0
    return float(slope), r2


def riesz_energy(mu: DiscreteMeasure, beta: float, diagonal: bool = True,
                 rho_min: Optional[float] = None) -> float:
    """Discrete E_beta(mu) = sum_{i != j} w_i w_j |p_i - p_j|^-beta (+ self terms).

    Each atom's self term is ``w_i^2 rho_i^-beta`` with ``rho_i`` half its
    nearest-neighbour distance, floored at ``rho_min`` (default 1e-9 * diameter).
    Coincident atoms give ``inf``.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    p, w = mu.points, mu.weights
    N = len(mu)
    total = 0.0
    nn = np.full(N, np.inf)
    for s in range(0, N, _CHUNK):
        d = np.linalg.norm(p[s:s + _CHUNK, None, :] - p[None, :, :], axis=2)
        rows = np.arange(d.shape[0])
        d[rows, s + rows] = np.inf
        if np.any(d == 0):
            return math.inf
        nn[s:s + _CHUNK] = d.min(axis=1)
        total += float(np.sum(w[s:s + _CHUNK, None] * w[None, :] * d ** (-beta)))
    if diagonal:
        floor = rho_min if rho_min is not None else 1e-9 * max(mu.diameter, 1e-300)
        rho = np.maximum(0.5 * nn, floor)
        rho[~np.isfinite(rho)] = floor if N == 1 else rho[np.isfinite(rho)].max()
        total += float(np.sum(w**2 * rho ** (-beta)))
    return total
