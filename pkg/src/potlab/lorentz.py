"""Distribution functions, rearrangements and Lorentz (quasi-)norms over a DiscreteMeasure.

Every integral of a power of a step function is evaluated in closed form per
step.  The only quadrature is the one for the averaged rearrangement
``f_nat(t) = (1/t) int_0^t f*(s) ds``, which is not piecewise constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measure import DiscreteMeasure

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """A function known on the atoms of ``measure`` (one value per atom)."""

    measure: DiscreteMeasure
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size != len(self.measure):
            raise ValueError("values/atoms length mismatch")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite values")
        object.__setattr__(self, "values", v)

    def __mul__(self, c: float) -> "SampledFunction":
        return SampledFunction(self.measure, self.values * c)

    __rmul__ = __mul__

    def to_dict(self, measure_ref: str = "") -> dict:
        return {"measure_ref": measure_ref, "values": self.values.tolist()}


@dataclass(frozen=True)
class StepFunction:
    """Non-increasing step function, ``values[k]`` on ``[breakpoints[k], breakpoints[k+1])``."""

    breakpoints: np.ndarray
    values: np.ndarray

    @property
    def domain_end(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.breakpoints, t, side="right") - 1
        vals = np.concatenate([self.values, [0.0]])
        k = np.where(t >= self.breakpoints[-1], self.values.size, np.maximum(k, 0))
        return vals[k]

    def level_measure(self, s: float) -> float:
        """Lebesgue measure of ``{t : f*(t) > s}``."""
        k = int(np.sum(self.values > s))
        return float(self.breakpoints[k])


def _check_same(f: SampledFunction, g: SampledFunction):
    if f.measure is not g.measure:
        same = (len(f.measure) == len(g.measure)
                and np.array_equal(f.measure.points, g.measure.points)
                and np.array_equal(f.measure.weights, g.measure.weights))
        if not same:
            raise ValueError("measure mismatch")


def distribution_function(f: SampledFunction, s: float) -> float:
    """d_f(s) = mu({|f| > s})."""
    mask = np.abs(f.values) > s
    return math.fsum(f.measure.weights[mask])


def decreasing_rearrangement(f: SampledFunction) -> StepFunction:
    return _rearrange(np.abs(f.values), f.measure.weights)


def _rearrange(a: np.ndarray, w: np.ndarray) -> StepFunction:
    order = np.argsort(-a, kind="stable")
    a, w = a[order], w[order]
    # merge ties into single steps
    start = np.flatnonzero(np.concatenate([[True], a[1:] != a[:-1]]))
    widths = np.add.reduceat(w, start) if a.size else np.zeros(0)
    bp = np.concatenate([[0.0], np.cumsum(widths)])
    return StepFunction(bp, a[start].copy())


@dataclass(frozen=True)
class AveragedRearrangement:
    """``f_nat(t) = (1/t) int_0^t f*(s) ds`` for a step function ``f*``."""

    step: StepFunction

    @property
    def cumulative(self) -> np.ndarray:
        """``C_k = int_0^{t_k} f*``."""
        bp, v = self.step.breakpoints, self.step.values
        return np.concatenate([[0.0], np.cumsum(v * np.diff(bp))])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        bp, v = self.step.breakpoints, self.step.values
        C = self.cumulative
        k = np.clip(np.searchsorted(bp, t, side="right") - 1, 0, v.size - 1)
        inside = t < bp[-1]
        num = np.where(inside, C[k] + v[k] * (t - bp[k]), C[-1])
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(t > 0, num / np.where(t > 0, t, 1.0), v[0] if v.size else 0.0)
        return out


def maximal_rearrangement(f: SampledFunction) -> AveragedRearrangement:
    return AveragedRearrangement(decreasing_rearrangement(f))


def _check_exponents(p: float, d: float):
    if not (p >= 1) or not (d >= 1):
        raise ValueError("invalid exponent")


def _clip_steps(step: StepFunction, upper):
    bp, v = step.breakpoints, step.values
    if upper is None:
        return bp, v
    M = float(upper)
    k = int(np.searchsorted(bp, M, side="left"))
    bp = np.concatenate([bp[:k], [M]]) if k < bp.size else bp.copy()
    bp[-1] = min(bp[-1], M)
    return bp, v[: bp.size - 1]


def step_quasinorm(bp: np.ndarray, v: np.ndarray, p: float, d: float) -> float:
    """||.||*_{pd} of the step function (bp, v); v need only be non-increasing."""
    if v.size == 0:
        return 0.0
    scale = float(np.max(v))
    if scale == 0:
        return 0.0
    u = v / scale
    if math.isinf(d):
        return scale * float(np.max(u * bp[1:] ** (1.0 / p)))
    a = d / p
    # (d/p) int_{t0}^{t1} t^{d/p - 1} dt = t1^a - t0^a
    s = np.sum(u**d * (bp[1:] ** a - bp[:-1] ** a))
    return scale * float(s) ** (1.0 / d)


def lorentz_quasinorm(f, p: float, d: float = math.inf, upper=None) -> float:
    """||f||*_{pd} over (0, upper), ``upper`` defaulting to the total mass."""
    _check_exponents(p, d)
    step = f if isinstance(f, StepFunction) else decreasing_rearrangement(f)
    bp, v = _clip_steps(step, upper)
    return step_quasinorm(bp, v, p, d)


def lorentz_quasinorm_distribution(f: SampledFunction, p: float, d: float = math.inf) -> float:
    """Same quantity written through the distribution function d_f.

    ``d int_0^{sup|f|} s^{d-1} d_f(s)^{d/p} ds`` (``sup_s s d_f(s)^{1/p}`` for d = inf).
    """
    _check_exponents(p, d)
    step = decreasing_rearrangement(f)
    u = step.values
    T = step.breakpoints[1:]  # d_f(s) = T[k] for s in [u[k+1], u[k])
    if u.size == 0 or u[0] == 0:
        return 0.0
    if math.isinf(d):
        return float(np.max(u * T ** (1.0 / p)))
    scale = float(u[0])
    un = u / scale
    lower = np.concatenate([un[1:], [0.0]])
    s = np.sum(T ** (d / p) * (un**d - lower**d))
    return scale * float(s) ** (1.0 / d)


def _natural_integral(bp: np.ndarray, v: np.ndarray, p: float, d: float) -> float:
    """(d/p) int_0^{bp[-1]} t^{d/p-1} f_nat(t)^d dt for the step function (bp, v)."""
    a = d / p
    C = np.concatenate([[0.0], np.cumsum(v * np.diff(bp))])
    # first step: f_nat = v[0]
    total = v[0] ** d * bp[1] ** a
    if v.size == 1:
        return float(total)
    lo, hi = bp[1:-1], bp[2:]
    A = C[1:-1] - v[1:] * lo  # f_nat(t) = A/t + v on [lo, hi)
    vv = v[1:]
    keep = hi > lo
    lo, hi, A, vv = lo[keep], hi[keep], A[keep], vv[keep]
    # integrate in u = log t on pieces whose end ratio is at most 2
    npieces = np.maximum(1, np.ceil(np.log2(hi / lo) - 1e-12).astype(int))
    rep = np.repeat(np.arange(lo.size), npieces)
    j = np.arange(rep.size) - np.repeat(np.cumsum(npieces) - npieces, npieces)
    llo, lhi = np.log(lo[rep]), np.log(hi[rep])
    step = (lhi - llo) / npieces[rep]
    u0 = llo + j * step
    nodes = u0[:, None] + 0.5 * step[:, None] * (_GL_X[None, :] + 1.0)
    t = np.exp(nodes)
    integrand = t**a * (A[rep][:, None] / t + vv[rep][:, None]) ** d
    total += a * float(np.sum(0.5 * step[:, None] * _GL_W[None, :] * integrand))
    return float(total)


def lorentz_norm_natural(f, p: float, d: float = math.inf, upper=None) -> float:
    """||f||^nat_{pd}: the quasi-norm formula with f* replaced by its running average."""
    if not (p > 1):
        raise ValueError("norm requires p > 1")
    _check_exponents(p, d)
    step = f if isinstance(f, StepFunction) else decreasing_rearrangement(f)
    bp, v = _clip_steps(step, upper)
    if v.size == 0 or np.max(v) == 0:
        return 0.0
    scale = float(v[0])
    u = v / scale
    if math.isinf(d):
        C = np.concatenate([[0.0], np.cumsum(u * np.diff(bp))])
        t = bp[1:]
        return scale * float(np.max(t ** (1.0 / p) * C[1:] / t))
    return scale * _natural_integral(bp, u, p, d) ** (1.0 / d)


def hardy_littlewood_pairing(f: SampledFunction, g: SampledFunction) -> tuple[float, float]:
    """(sum w |f g|, int f* g* dt); the first never exceeds the second."""
    _check_same(f, g)
    lhs = float(np.sum(f.measure.weights * np.abs(f.values * g.values)))
    fs, gs = decreasing_rearrangement(f), decreasing_rearrangement(g)
    bp = np.union1d(fs.breakpoints, gs.breakpoints)
    mid = 0.5 * (bp[1:] + bp[:-1])
    rhs = float(np.sum(fs(mid) * gs(mid) * np.diff(bp)))
    return lhs, rhs
