"""Quantitative checks of the trace and equivalence inequalities.

Inequalities with unspecified constants are checked as "ratio bounded and
stable under dilation / refinement"; inequalities with constant 1 are checked
directly against ``1 + tol``.  Every check returns a :class:`RatioReport`.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .extension import boundary_trace, build_psi, extend_half_space, gradient_magnitude
from .lorentz import SampledFunction, lorentz_quasinorm
from .measure import DiscreteMeasure, RadiiGrid, growth_constant
from .operators import (GridFunction, fractional_maximal_values, riesz_potential_values,
                        sharp_maximal_centered_values)
from .spaces import ExponentTuple, default_radii, morrey_lorentz_norm

EXACT_TOL = 1e-6


@dataclass
class RatioReport:
    """One row per case; ``passed`` is recomputed from the rows by :meth:`evaluate`."""

    name: str
    rows: list = field(default_factory=list)
    bound: float = math.inf  # declared spread bound
    ratio_cap: float = math.inf  # declared cap on every ratio (exact-direction checks)
    stability: float = math.inf  # declared cap on the relative change under grid refinement
    per_case: bool = False  # spread over each case's scale sweep instead of over all rows
    skipped: int = 0
    notes: dict = field(default_factory=dict)

    def add(self, case: str, scale: float, lhs: float, rhs: float, **extra):
        if rhs == 0 and lhs == 0:
            self.skipped += 1
            return
        ratio = math.inf if rhs == 0 else lhs / rhs
        row = {"case": case, "scale": float(scale), "lhs": float(lhs), "rhs": float(rhs), "ratio": ratio}
        row.update(extra)
        self.rows.append(row)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r["ratio"] for r in self.rows], dtype=float)

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max()) if self.rows else math.nan

    @property
    def min_ratio(self) -> float:
        return float(self.ratios.min()) if self.rows else math.nan

    @staticmethod
    def _spread(r: np.ndarray) -> float:
        lo = float(r.min())
        return math.inf if lo <= 0 else float(r.max()) / lo

    @property
    def spread(self) -> float:
        if not self.rows:
            return math.nan
        if not self.per_case:
            return self._spread(self.ratios)
        cases = {}
        for row in self.rows:
            cases.setdefault(row["case"], []).append(row["ratio"])
        return max(self._spread(np.asarray(v, dtype=float)) for v in cases.values())

    def evaluate(self) -> bool:
        if not self.rows:
            return True
        r = self.ratios
        if not np.all(np.isfinite(r)):
            return False
        change = self.notes.get("refinement_change", 0.0)
        return bool(self.spread <= self.bound and r.max() <= self.ratio_cap and change <= self.stability)

    @property
    def passed(self) -> bool:
        return self.evaluate()

    def to_csv(self) -> str:
        keys = ["case", "scale", "lhs", "rhs", "ratio"]
        for r in self.rows:
            keys += [k for k in r if k not in keys]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in self.rows:
            w.writerow([_fmt(r.get(k, "")) for k in keys])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "name": self.name,
            "cases": len(self.rows),
            "skipped": self.skipped,
            "max_ratio": self.max_ratio,
            "min_ratio": self.min_ratio,
            "spread": self.spread,
            "bound": self.bound,
            "ratio_cap": self.ratio_cap,
            "stability": self.stability,
            "per_case": self.per_case,
            "passed": self.passed,
            **self.notes,
        }


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return x


# --------------------------------------------------------------------------
# test families (unit scale; dilate with GridFunction.dilated)
# --------------------------------------------------------------------------

def ball_indicator(n: int, cells: int = 32, center=None) -> GridFunction:
    """chi_{B(center, 1)} on a grid of ``cells`` cells per unit length around the ball."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    return GridFunction.sample(lambda x: (np.linalg.norm(x - c, axis=1) < 1).astype(float),
                               c - 1, c + 1, 2 * cells)


def tensor_bump(n: int, cells: int = 32, center=None) -> GridFunction:
    """(1 - |x - c|^2)_+^2."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    return GridFunction.sample(lambda x: np.clip(1 - np.sum((x - c) ** 2, axis=1), 0, None) ** 2,
                               c - 1, c + 1, 2 * cells)


def two_bumps(n: int, cells: int = 16, separation: float = 3.0) -> GridFunction:
    """Two unit bumps centred at -/+ separation/2 along the first axis."""
    c = np.zeros(n)
    c[0] = separation / 2
    lo, hi = -c - 1, c + 1

    def func(x):
        return sum(np.clip(1 - np.sum((x - s * c) ** 2, axis=1), 0, None) ** 2 for s in (-1, 1))

    shape = np.full(n, 2 * cells)
    shape[0] = int(round(cells * (separation + 2)))
    return GridFunction.sample(func, lo, hi, shape)


def default_family(n: int, cells: int = 32) -> dict:
    return {"ball": ball_indicator(n, cells), "bump": tensor_bump(n, cells),
            "two_bumps": two_bumps(n, cells // 2)}


def log_sweep(lo: float, hi: float, count: int = 5) -> np.ndarray:
    return np.geomspace(lo, hi, count)


def refined(f: GridFunction, func: Callable, factor: int = 2) -> GridFunction:
    """Resample ``func`` on the grid of f with ``factor`` times more cells per axis."""
    return GridFunction.sample(func, f.origin, f.upper, np.array(f.shape) * factor)


# --------------------------------------------------------------------------
# trace inequalities
# --------------------------------------------------------------------------

def _check_params(params: ExponentTuple, strict: bool):
    bad = params.violations()
    if bad:
        msg = "inadmissible exponents: " + "; ".join(bad)
        if strict:
            raise ValueError(msg)
        warnings.warn(msg, stacklevel=3)


def _ambient_norm(f: GridFunction, p: float, ell: float, lam: float) -> float:
    """Morrey-Lorentz norm over Lebesgue measure, centres restricted to supp f."""
    s = f.as_sampled()
    if not np.any(s.values):
        return 0.0
    return morrey_lorentz_norm(s, p, ell, lam, f.dim).value


def _mu_norm(field_: SampledFunction, q: float, s: float, lam_star: float, beta: float, radii=None,
             centers=None) -> float:
    if not np.any(field_.values):
        return 0.0
    return morrey_lorentz_norm(field_, q, s, lam_star, beta, radii=radii, centers=centers).value


def _sweep_radii(mu: DiscreteMeasure, scales) -> np.ndarray:
    """Default radii over mu; a single atom has no intrinsic scale, so the sweep supplies one."""
    if len(mu) > 1 and mu.diameter > 0:
        return default_radii(mu)
    s = np.asarray(scales, dtype=float)
    return RadiiGrid.anchored(16 * float(s.max()), float(s.min()) / 16).radii


def trace_sufficiency_sweep(params: ExponentTuple, mu: DiscreteMeasure, family: dict, scales,
                            operator: str = "riesz", bound: float = 1.5, strict: bool = False,
                            growth: Optional[float] = None, radii=None) -> RatioReport:
    """ratio = ||T_delta f||_{M^lam*_{q,s}(mu)} / ([mu]_beta^{1/q} ||f||_{M^lam_{p,ell}}) for
    each f in ``family`` dilated by each scale; T is I_delta or M_delta."""
    _check_params(params, strict)
    if operator not in ("riesz", "maximal"):
        raise ValueError("operator must be 'riesz' or 'maximal'")
    if radii is None:
        radii = _sweep_radii(mu, scales)
    if growth is None:
        growth = growth_constant(mu, params.beta, radii).constant
    d = params.delta
    rep = RatioReport(f"trace_{operator}", bound=bound, per_case=True,
                      notes={"delta": d, "growth_constant": growth, "operator": operator})
    for name, f0 in family.items():
        for r in scales:
            f = f0.dilated(r)
            if operator == "riesz":
                vals = riesz_potential_values(f.with_values(np.abs(f.values)), d, mu)
            else:
                vals = fractional_maximal_values(f, d, mu)
            lhs = _mu_norm(SampledFunction(mu, vals), params.q, params.s, params.lam_star, params.beta, radii)
            rhs = growth ** (1 / params.q) * _ambient_norm(f, params.p, params.ell, params.lam)
            rep.add(name, r, lhs, rhs)
    return rep


def maximal_trace_check(params: ExponentTuple, mu: DiscreteMeasure, family: dict, scales,
                        bound: float = 1.5, strict: bool = False, tol: float = EXACT_TOL,
                        radii=None) -> RatioReport:
    """The trace sweep with M_delta, plus the row-wise check M-ratio <= I-ratio (1 + tol)."""
    radii = _sweep_radii(mu, scales) if radii is None else radii
    growth = growth_constant(mu, params.beta, radii).constant
    rm = trace_sufficiency_sweep(params, mu, family, scales, "maximal", bound, strict, growth, radii)
    ri = trace_sufficiency_sweep(params, mu, family, scales, "riesz", bound, strict, growth, radii)
    worst = 0.0
    for a, b in zip(rm.rows, ri.rows):
        a["riesz_ratio"] = b["ratio"]
        worst = max(worst, a["ratio"] / b["ratio"] if b["ratio"] > 0 else math.inf)
    rm.notes.update(max_m_over_i=worst, riesz_spread=ri.spread, riesz_passed=ri.passed,
                    dominated=bool(worst <= 1 + tol))
    rm.name = "maximal_trace"
    return rm


def _probe_radii(mu: DiscreteMeasure, r: float, per_octave: int = 4) -> np.ndarray:
    lo = max(r / 16, mu.spacing)
    return RadiiGrid.anchored(16 * r, min(lo, 16 * r), per_octave).radii


@dataclass
class ProbeReport:
    radii: np.ndarray
    g: np.ndarray
    growth_ratio: float  # g(smallest r) / g(largest r)
    spread: float
    monotone: bool
    diverges: bool
    bounded: bool

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "g"])
        for r, g in zip(self.radii, self.g):
            w.writerow([_fmt(r), _fmt(g)])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"name": "necessity_probe", "growth_ratio": self.growth_ratio, "spread": self.spread,
                "monotone": self.monotone, "diverges": self.diverges, "bounded": self.bounded}


def necessity_probe(mu: DiscreteMeasure, params: ExponentTuple, radii, x0=None, cells: int = 16,
                    diverge_factor: float = 10.0, bounded_spread: float = 2.0,
                    rtol: float = 1e-9) -> ProbeReport:
    """g(r) = [||I_delta chi_{B(x0, r)}||_{M^lam*_{q,s}(mu)} / r^{n/lam}]^q over ``radii``.

    A growth bound mu(B_r) <= C r^beta keeps g bounded as r -> 0; an atom makes
    it blow up like r^{-beta}.
    """
    n = params.n
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    radii = np.sort(np.asarray(radii, dtype=float))
    unit = ball_indicator(n, cells, center=np.zeros(n))
    gs = []
    for r in radii:
        f = GridFunction(unit.origin * r + x0, unit.spacing * r, unit.values)
        field_ = SampledFunction(mu, riesz_potential_values(f, params.delta, mu))
        norm = _mu_norm(field_, params.q, params.s, params.lam_star, params.beta, _probe_radii(mu, r))
        gs.append((norm / r ** (n / params.lam)) ** params.q)
    g = np.asarray(gs)
    ratio = float(g[0] / g[-1])
    spread = float(g.max() / g.min())
    monotone = bool(np.all(np.diff(g) <= 0))
    diverges = bool(monotone and ratio >= diverge_factor * (1 - rtol))
    return ProbeReport(radii, g, ratio, spread, monotone, diverges, bool(spread <= bounded_spread))


# --------------------------------------------------------------------------
# operator comparisons over mu
# --------------------------------------------------------------------------

def equivalence_sweep(family: dict, mu: DiscreteMeasure, alpha: float, beta: float, p: float,
                      ell: float, lam: float, scales=(1.0,), bound: float = 10.0,
                      tol: float = EXACT_TOL, radii=None) -> RatioReport:
    """ratio ||M_alpha f|| / ||I_alpha |f| || in M^lam_{p,ell}(mu) over the family and scales."""
    n = mu.dim
    if not (0 < alpha < n and n - alpha < beta <= n):
        raise ValueError("need 0 < alpha < n and n - alpha < beta <= n")
    rep = RatioReport("equivalence", bound=bound, ratio_cap=1 + tol,
                      notes={"alpha": alpha, "beta": beta})
    for name, f0 in family.items():
        for r in scales:
            f = f0.dilated(r)
            m = SampledFunction(mu, fractional_maximal_values(f, alpha, mu))
            i = SampledFunction(mu, riesz_potential_values(f.with_values(np.abs(f.values)), alpha, mu))
            rep.add(name, r, _mu_norm(m, p, ell, lam, beta, radii), _mu_norm(i, p, ell, lam, beta, radii))
    return rep


def kernel_minorant_check(family: dict, alpha: float, points, tol: float = EXACT_TOL) -> RatioReport:
    """M_alpha f(x) <= I_alpha |f|(x) at every point; ratio_cap = 1 + tol."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rep = RatioReport("kernel_minorant", ratio_cap=1 + tol, notes={"alpha": alpha})
    for name, f in family.items():
        m = fractional_maximal_values(f, alpha, pts)
        i = riesz_potential_values(f.with_values(np.abs(f.values)), alpha, pts)
        for k in range(pts.shape[0]):
            rep.add(f"{name}[{k}]", 1.0, m[k], i[k])
    return rep


def _maximal_any_order(f: GridFunction, alpha: float, pts: np.ndarray) -> np.ndarray:
    if alpha == f.dim:
        # r^0 times the mass of the ball is maximal once the ball holds supp f
        return np.full(pts.shape[0], float(np.abs(f.values).sum() * f.cell_volume))
    return fractional_maximal_values(f, alpha, pts)


def pointwise_interpolation_check(family: dict, gamma: float, delta: float, alpha: float, points,
                                  cap: float = math.inf, refine: Optional[dict] = None,
                                  stability: float = 0.2) -> RatioReport:
    """|I_delta f(x)| / (M_alpha f(x)^theta M_gamma f(x)^{1 - theta}), theta = (delta-gamma)/(alpha-gamma).

    ``refine`` maps family names to finer versions of the same functions; the
    max ratio must then move by at most ``stability`` (relative).
    """
    if not (0 <= gamma < delta < alpha):
        raise ValueError("invalid exponents")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    theta = (delta - gamma) / (alpha - gamma)

    def run(fam, label):
        rep = RatioReport(label, ratio_cap=cap, notes={"theta": theta})
        for name, f in fam.items():
            if not (alpha <= f.dim):
                raise ValueError("invalid exponents")
            i = np.abs(riesz_potential_values(f, delta, pts))
            ma = _maximal_any_order(f, alpha, pts)
            mg = _maximal_any_order(f, gamma, pts)
            rhs = ma**theta * mg ** (1 - theta)
            for k in range(pts.shape[0]):
                rep.add(f"{name}[{k}]", 1.0, i[k], rhs[k])
        return rep

    rep = run(family, "pointwise_interpolation")
    if refine is not None:
        fine = run(refine, "fine")
        change = abs(fine.max_ratio / rep.max_ratio - 1) if rep.rows else 0.0
        rep.notes.update(refined_max_ratio=fine.max_ratio, refinement_change=change)
        rep.stability = stability
    return rep


def holder_ball_check(family: dict, p: float, k: float, balls: Sequence, cap: Optional[float] = None
                      ) -> RatioReport:
    """nu(B)^{1/p - 1} int_B |f| dnu / ||f chi_B||*_{p,k}; cap 1 + 1e-9 when k = p."""
    if not (1 <= p < math.inf and k >= 1):
        raise ValueError("invalid exponent")
    if cap is None:
        cap = 1 + 1e-9 if k == p else math.inf
    rep = RatioReport("holder_ball", ratio_cap=cap, notes={"p": p, "k": k})
    for name, f in family.items():
        s = f.as_sampled(drop_zeros=False)
        mu = s.measure
        for j, (x, R) in enumerate(balls):
            idx = mu.ball_indices(np.asarray(x, dtype=float), R)
            vol = float(mu.weights[idx].sum())
            if vol == 0:
                rep.skipped += 1
                continue
            lhs = vol ** (1 / p - 1) * float(np.dot(mu.weights[idx], np.abs(s.values[idx])))
            local = SampledFunction(DiscreteMeasure(mu.points[idx], mu.weights[idx]), s.values[idx])
            rep.add(f"{name}[{j}]", R, lhs, lorentz_quasinorm(local, p, k))
    return rep


def sharp_maximal_domination_check(family: dict, mu: DiscreteMeasure, alpha: float, beta: float,
                                   points=None, radii=None, growth: Optional[float] = None,
                                   refine: Optional[dict] = None, stability: float = 0.2) -> RatioReport:
    """sup_r r^-beta int_{B_r(x)} |I f - (I f)_B| dmu / ([mu]_beta M_alpha f(x)) at ``points``
    (default: every atom)."""
    n = mu.dim
    if not (0 < alpha < n and n - alpha < beta <= n):
        raise ValueError("need 0 < alpha < n and n - alpha < beta <= n")
    r = default_radii(mu) if radii is None else radii
    if growth is None:
        growth = growth_constant(mu, beta, r).constant
    pts = mu.points if points is None else np.atleast_2d(np.asarray(points, dtype=float))

    def run(fam, label):
        rep = RatioReport(label, notes={"alpha": alpha, "beta": beta, "growth_constant": growth})
        for name, f in fam.items():
            field_ = SampledFunction(mu, riesz_potential_values(f, alpha, mu))
            sharp = sharp_maximal_centered_values(field_, beta, pts, r)
            m = fractional_maximal_values(f, alpha, pts)
            for k in range(pts.shape[0]):
                rep.add(f"{name}[{k}]", 1.0, sharp[k], growth * m[k])
        return rep

    rep = run(family, "sharp_domination")
    if refine is not None:
        fine = run(refine, "fine")
        change = abs(fine.max_ratio / rep.max_ratio - 1) if rep.rows else 0.0
        rep.notes.update(refined_max_ratio=fine.max_ratio, refinement_change=change)
        rep.stability = stability
    return rep


# --------------------------------------------------------------------------
# half-space: extension and the Sobolev trace
# --------------------------------------------------------------------------

def half_bump(n: int, cells: int = 16, center_height: float = 0.5) -> GridFunction:
    """(1 - |x - c|^2)_+^2 restricted to x_n >= 0, c = (0, ..., 0, center_height)."""
    c = np.zeros(n)
    c[-1] = center_height
    lo = -np.ones(n)
    lo[-1] = 0.0
    hi = np.ones(n)
    hi[-1] = center_height + 1.5
    shape = np.round((hi - lo) * cells).astype(int)
    return GridFunction.sample(lambda x: np.clip(1 - np.sum((x - c) ** 2, axis=1), 0, None) ** 2,
                               lo, hi, shape)


def half_space_family(n: int, cells: int = 16) -> dict:
    return {"bump_on_boundary": half_bump(n, cells, 0.0), "bump_near": half_bump(n, cells, 0.5)}


def extension_gradient_check(family: dict, p: float, ell: float, lam: float, scales,
                             bound: float = 1.05, psi=None) -> RatioReport:
    """||grad Ef||_{M^lam_{p,ell}(R^n)} / ||grad f||_{M^lam_{p,ell}(R^n_+)} over dilations."""
    psi = build_psi() if psi is None else psi
    rep = RatioReport("extension_gradient", bound=bound, per_case=True,
                      notes={"gradient_constant": psi.gradient_constant(lam)})
    for name, f0 in family.items():
        for r in scales:
            f = f0.dilated(r)
            E = extend_half_space(f, psi)
            rep.add(name, r, _ambient_norm(gradient_magnitude(E), p, ell, lam),
                    _ambient_norm(gradient_magnitude(f), p, ell, lam))
    return rep


def sobolev_trace_check(family: dict, params: ExponentTuple, scales, bound: float = 2.0,
                        strict: bool = True, psi=None) -> RatioReport:
    """||Ef(x', 0)||_{M^lam*_{q,s}(boundary)} / ||grad f||_{M^lam_{p,ell}(R^n_+)} over dilations.

    The boundary measure is Lebesgue measure on the x' cell centres of f's grid.
    """
    n, lam, ls = params.n, params.lam, params.lam_star
    problems = []
    if not (1 < params.p <= lam < n):
        problems.append("need 1 < p <= lambda < n")
    if abs((n - 1) / ls - (n / lam - 1)) > 1e-12:
        problems.append("need (n-1)/lambda* = n/lambda - 1")
    if not (params.q / ls <= params.p / lam + 1e-12):
        problems.append("need q/lambda* <= p/lambda")
    if problems:
        msg = "inadmissible exponents: " + "; ".join(problems)
        if strict:
            raise ValueError(msg)
        warnings.warn(msg, stacklevel=2)
    psi = build_psi() if psi is None else psi
    rep = RatioReport("sobolev_trace", bound=bound, per_case=True)
    for name, f0 in family.items():
        for r in scales:
            f = f0.dilated(r)
            E = extend_half_space(f, psi)
            plane = _boundary_plane(f)
            tr = boundary_trace(E, plane)
            lhs = _mu_norm(tr, params.q, params.s, ls, n - 1)
            rhs = _ambient_norm(gradient_magnitude(f), params.p, params.ell, lam)
            rep.add(name, r, lhs, rhs)
    return rep


def _boundary_plane(f: GridFunction) -> DiscreteMeasure:
    axes = f.axes()[:-1]
    g = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([a.ravel() for a in g] + [np.zeros(g[0].size)], axis=1)
    return DiscreteMeasure(pts, np.full(pts.shape[0], float(np.prod(f.spacing[:-1]))))
