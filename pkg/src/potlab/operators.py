"""Riesz potential, fractional maximal function and sharp maximal functions.

Functions on the ambient space are :class:`GridFunction` objects (values at
cell centres, Lebesgue reference measure).  The kernel normalisation constant
is 1: ``I_alpha f(x) = int |x - y|^(alpha - n) f(y) dy``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lorentz import SampledFunction
from .measure import DiscreteMeasure, RadiiGrid, _as_radii, unit_sphere_area

_CHUNK = 256


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values at the centres of a uniform axis-aligned grid of cells."""

    origin: np.ndarray
    spacing: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        spacing = np.broadcast_to(np.asarray(self.spacing, dtype=float), origin.shape).copy()
        values = np.asarray(self.values, dtype=float)
        if values.ndim != origin.size:
            raise ValueError("shape/dimension mismatch")
        if np.any(spacing <= 0):
            raise ValueError("spacing must be positive")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite values")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.origin.size

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.spacing * np.array(self.shape)

    def axes(self) -> list:
        return [self.origin[i] + (np.arange(self.shape[i]) + 0.5) * self.spacing[i]
                for i in range(self.dim)]

    def centers(self) -> np.ndarray:
        g = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([a.ravel() for a in g], axis=1)

    def locate(self, x) -> Optional[int]:
        """Flat index of the half-open cell containing ``x``, or None."""
        k = np.floor((np.asarray(x, dtype=float) - self.origin) / self.spacing).astype(int)
        if np.any(k < 0) or np.any(k >= np.array(self.shape)):
            return None
        return int(np.ravel_multi_index(tuple(k), self.shape))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.origin, self.spacing, np.asarray(values, dtype=float).reshape(self.shape))

    def dilated(self, factor: float) -> "GridFunction":
        """The function ``y -> f(y / factor)`` on the correspondingly scaled grid."""
        return GridFunction(self.origin * factor, self.spacing * factor, self.values)

    @classmethod
    def sample(cls, func, lo, hi, shape) -> "GridFunction":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        shape = tuple(np.broadcast_to(np.asarray(shape, dtype=int), lo.shape))
        g = cls(lo, (hi - lo) / np.array(shape), np.zeros(shape))
        return g.with_values(func(g.centers()))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "origin": self.origin.tolist(),
            "spacing": self.spacing.tolist(),
            "shape": list(self.shape),
            "values": self.values.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GridFunction":
        shape = tuple(int(s) for s in doc["shape"])
        vals = np.asarray(doc["values"], dtype=float)
        if vals.size != int(np.prod(shape)) or len(shape) != int(doc["dim"]):
            raise ValueError("shape/values mismatch")
        return cls(np.asarray(doc["origin"]), np.asarray(doc["spacing"]), vals.reshape(shape))

    def support_box(self):
        """Bounding box (cell extents) of the cells where f != 0, or None."""
        nz = np.argwhere(self.values != 0)
        if nz.size == 0:
            return None
        lo = self.origin + nz.min(axis=0) * self.spacing
        hi = self.origin + (nz.max(axis=0) + 1) * self.spacing
        return lo, hi

    def as_sampled(self, drop_zeros: bool = True) -> SampledFunction:
        """The grid as a SampledFunction over the midpoint Lebesgue measure of its cells."""
        c = self.centers()
        v = self.values.ravel()
        if drop_zeros:
            keep = v != 0
            if not keep.any():
                keep[0] = True
            c, v = c[keep], v[keep]
        mu = DiscreteMeasure(c, np.full(c.shape[0], self.cell_volume))
        return SampledFunction(mu, v)


def self_cell_radius(f: GridFunction) -> float:
    """Radius of the ball with the volume of one cell."""
    n = f.dim
    return (f.cell_volume * n / unit_sphere_area(n)) ** (1.0 / n)


def _check_order(alpha: float, n: int, allow_zero: bool = False):
    ok = (0 <= alpha < n) if allow_zero else (0 < alpha < n)
    if not ok:
        raise ValueError("invalid order")


def _targets(targets) -> np.ndarray:
    if isinstance(targets, DiscreteMeasure):
        return targets.points
    return np.atleast_2d(np.asarray(targets, dtype=float))


def _nonzero_cells(f: GridFunction):
    v = f.values.ravel()
    idx = np.flatnonzero(v)
    return idx, f.centers()[idx], v[idx]


def riesz_potential_values(f: GridFunction, alpha: float, points) -> np.ndarray:
    n = f.dim
    _check_order(alpha, n)
    pts = _targets(points)
    idx, c, v = _nonzero_cells(f)
    out = np.zeros(pts.shape[0])
    if idx.size == 0:
        return out
    vol = f.cell_volume
    self_w = unit_sphere_area(n) * self_cell_radius(f) ** alpha / alpha
    pos = np.full(f.values.size, -1)
    pos[idx] = np.arange(idx.size)
    for s in range(0, pts.shape[0], _CHUNK):
        x = pts[s:s + _CHUNK]
        d = np.linalg.norm(x[:, None, :] - c[None, :, :], axis=2)
        with np.errstate(divide="ignore"):
            k = np.where(d > 0, d, np.inf) ** (alpha - n)
        vals = (k * v[None, :]).sum(axis=1) * vol
        for i, xi in enumerate(x):
            cell = f.locate(xi)
            if cell is not None and pos[cell] >= 0:
                j = pos[cell]
                vals[i] += v[j] * (self_w - k[i, j] * vol)
        out[s:s + _CHUNK] = vals
    return out


def riesz_potential(f: GridFunction, alpha: float, x) -> float:
    """I_alpha f(x); the cell containing x contributes its value times the
    kernel integral over the equal-volume ball centred at x."""
    return float(riesz_potential_values(f, alpha, np.atleast_2d(np.asarray(x, dtype=float)))[0])


def riesz_potential_field(f: GridFunction, alpha: float, targets: DiscreteMeasure) -> SampledFunction:
    return SampledFunction(targets, riesz_potential_values(f, alpha, targets))


# default smallest radius, in equal-volume cell radii; smaller balls see the
# cell-centre membership rule more than the function
MAXIMAL_FLOOR_CELLS = 32


def default_maximal_radii(f: GridFunction, x, per_octave: int = 8) -> Optional[np.ndarray]:
    """Geometric radii anchored at diam(supp f) + dist(x, supp f), down to
    ``MAXIMAL_FLOOR_CELLS`` equal-volume cell radii."""
    box = f.support_box()
    if box is None:
        return None
    lo, hi = box
    x = np.asarray(x, dtype=float)
    dist = float(np.linalg.norm(np.maximum(0, np.maximum(lo - x, x - hi))))
    top = float(np.linalg.norm(hi - lo)) + dist
    return RadiiGrid.anchored(top, min(MAXIMAL_FLOOR_CELLS * self_cell_radius(f), top), per_octave).radii


def fractional_maximal_values(f: GridFunction, alpha: float, points, radii=None,
                              per_octave: int = 8) -> np.ndarray:
    n = f.dim
    _check_order(alpha, n, allow_zero=True)
    pts = _targets(points)
    idx, c, v = _nonzero_cells(f)
    out = np.zeros(pts.shape[0])
    if idx.size == 0:
        return out
    floor = self_cell_radius(f)
    fixed = None
    if radii is not None:
        fixed = _as_radii(radii)
        # balls smaller than one cell are below the grid resolution
        fixed = fixed[fixed >= floor * (1 - 1e-12)]
        if fixed.size == 0:
            return out
    m = np.abs(v) * f.cell_volume
    for s in range(0, pts.shape[0], _CHUNK):
        x = pts[s:s + _CHUNK]
        d = np.linalg.norm(x[:, None, :] - c[None, :, :], axis=2)
        order = np.argsort(d, axis=1, kind="stable")
        ds = np.take_along_axis(d, order, axis=1)
        cm = np.concatenate([np.zeros((x.shape[0], 1)), np.cumsum(m[order], axis=1)], axis=1)
        for i in range(x.shape[0]):
            r = fixed if fixed is not None else default_maximal_radii(f, x[i], per_octave)
            mass = cm[i, np.searchsorted(ds[i], r, side="left")]
            out[s + i] = float(np.max(r ** (alpha - n) * mass))
    return out


def fractional_maximal(f: GridFunction, alpha: float, x, radii=None, per_octave: int = 8) -> float:
    """M_alpha f(x) = max_r r^(alpha-n) * sum of |f| * vol over cells centred in B_r(x)."""
    return float(fractional_maximal_values(f, alpha, np.atleast_2d(np.asarray(x, dtype=float)),
                                           radii, per_octave)[0])


def fractional_maximal_field(f: GridFunction, alpha: float, targets: DiscreteMeasure,
                             radii=None, per_octave: int = 8) -> SampledFunction:
    return SampledFunction(targets, fractional_maximal_values(f, alpha, targets, radii, per_octave))


def sharp_maximal_centered_values(g: SampledFunction, beta: float, points, radii) -> np.ndarray:
    """sup_r r^-beta * sum_{B_r(x)} w |g - g_B| for each point."""
    r = _as_radii(radii)
    mu = g.measure
    pts = _targets(points)
    out = np.zeros(pts.shape[0])
    for i, x in enumerate(pts):
        d = np.linalg.norm(mu.points - x, axis=1)
        order = np.argsort(d, kind="stable")
        ds = d[order]
        w, val = mu.weights[order], g.values[order]
        best = 0.0
        for rk, k in zip(r, np.searchsorted(ds, r, side="left")):
            if k < 2:
                continue
            ww, vv = w[:k], val[:k]
            if vv.max() == vv.min():
                continue
            mean = np.dot(ww, vv) / ww.sum()
            best = max(best, rk ** (-beta) * float(np.dot(ww, np.abs(vv - mean))))
        out[i] = best
    return out


def sharp_maximal_centered(g: SampledFunction, beta: float, x, radii) -> float:
    return float(sharp_maximal_centered_values(g, beta, np.atleast_2d(np.asarray(x, dtype=float)), radii)[0])


def mean_oscillation(g: SampledFunction, idx: np.ndarray) -> float:
    """mu(Q)^-1 int_Q |g - g_Q| dmu over the atoms ``idx``; 0 for empty sets."""
    if idx.size == 0:
        return 0.0
    w, v = g.measure.weights[idx], g.values[idx]
    if v.max() == v.min():
        return 0.0
    m = w.sum()
    mean = np.dot(w, v) / m
    return float(np.dot(w, np.abs(v - mean)) / m)


def sharp_maximal_uncentered(g: SampledFunction, x, cube_family) -> float:
    """max over cubes Q containing x of the mean oscillation of g on Q."""
    x = np.asarray(x, dtype=float)
    best = None
    for Q in cube_family:
        if not Q.contains_point(x):
            continue
        idx = g.measure.box_indices(Q.lo, Q.hi)
        val = mean_oscillation(g, idx) if idx.size else None
        if val is not None:
            best = val if best is None else max(best, val)
        elif best is None:
            best = 0.0
    if best is None:
        raise ValueError("uncovered point")
    return best
