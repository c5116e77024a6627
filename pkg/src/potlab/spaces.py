"""Morrey and Morrey-Lorentz norms over a DiscreteMeasure."""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .lorentz import SampledFunction, _check_exponents
from .measure import DiscreteMeasure, RadiiGrid, _as_radii


@dataclass(frozen=True)
class ExponentTuple:
    """Exponents of a trace inequality I_delta : M^lam_{p,ell}(dnu) -> M^lam_star_{q,s}(dmu).

    ``delta`` is derived as ``n/lam - beta/lam_star``.
    """

    n: int
    beta: float
    p: float
    q: float
    lam: float
    lam_star: float
    ell: float = math.inf
    s: float = math.inf

    @property
    def delta(self) -> float:
        return self.n / self.lam - self.beta / self.lam_star

    def violations(self) -> list[str]:
        out = []
        n, b, p, q, lam, ls = self.n, self.beta, self.p, self.q, self.lam, self.lam_star
        d = self.delta
        if not (1 < p <= lam < math.inf):
            out.append("need 1 < p <= lambda < inf")
        if not (1 < q <= ls < math.inf):
            out.append("need 1 < q <= lambda* < inf")
        if not (q / ls <= p / lam + 1e-12):
            out.append("need q/lambda* <= p/lambda")
        if not (0 < d < n / lam):
            out.append("need 0 < delta < n/lambda")
        if not (n - d * p < b <= n):
            out.append("need n - delta p < beta <= n")
        if not (p < q):
            out.append("need p < q")
        if not (self.ell <= self.s):
            out.append("outside the verified regime ell <= s")
        return out

    @property
    def admissible(self) -> bool:
        return not self.violations()


@dataclass
class NormReport:
    value: float
    witness_center: np.ndarray
    witness_radius: float
    centers: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    table: np.ndarray = field(repr=False)  # table[i, k]: scaled local norm

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{j}" for j in range(self.centers.shape[1])] + ["radius", "value"])
        for i, c in enumerate(self.centers):
            for k, r in enumerate(self.radii):
                w.writerow([format(x, ".17g") for x in c] + [format(r, ".17g"), format(self.table[i, k], ".17g")])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "witness_center": np.asarray(self.witness_center).tolist(),
            "witness_radius": self.witness_radius,
        }


def default_radii(mu: DiscreteMeasure, per_octave: int = 4) -> np.ndarray:
    """Radii from half the atom spacing up to the diameter of spt(mu)."""
    top = mu.diameter
    floor = 0.5 * mu.spacing
    if top <= 0 or floor <= 0:
        raise ValueError("empty grid")
    return RadiiGrid.anchored(top, min(floor, top), per_octave).radii


def _resolve(f: SampledFunction, radii, centers):
    mu = f.measure
    r = default_radii(mu) if radii is None else _as_radii(radii)
    c = mu.points if centers is None else np.atleast_2d(np.asarray(centers, dtype=float))
    return r, c


def _report(table, centers, r):
    i, k = np.unravel_index(int(np.argmax(table)), table.shape)
    return NormReport(float(table[i, k]), centers[i].copy(), float(r[k]), centers, r, table)


def morrey_lorentz_norm(f: SampledFunction, p: float, ell: float, lam: float, beta: float,
                        radii=None, centers=None) -> NormReport:
    """sup over centres x and radii R of R^{-beta(1/p - 1/lam)} ||f||*_{p,ell} on B_R(x)."""
    _check_exponents(p, ell)
    if not (0 < beta):
        raise ValueError("beta must be positive")
    if not (p <= lam):
        warnings.warn("p > lambda: outside the Morrey range", stacklevel=2)
    r, c = _resolve(f, radii, centers)
    mu = f.measure
    a = np.abs(f.values)
    keep = a > 0
    table = np.zeros((c.shape[0], r.size))
    if not keep.any():
        return _report(table, c, r)
    order = np.flatnonzero(keep)[np.argsort(-a[keep], kind="stable")]
    pts, w = mu.points[order], mu.weights[order]
    scale = float(a[order[0]])
    u = a[order] / scale
    scaling = r ** (-beta * (1.0 / p - 1.0 / lam))
    inf = math.isinf(ell)
    ud = None if inf else u**ell
    ex = 1.0 / p if inf else ell / p
    for i, x in enumerate(c):
        d = np.linalg.norm(pts - x, axis=1)
        near = d < r[-1]
        if not near.any():
            continue
        dn, wn = d[near], w[near]
        mask = dn[None, :] < r[:, None]
        T = np.cumsum(mask * wn[None, :], axis=1)
        if inf:
            loc = np.max(mask * u[near][None, :] * T**ex, axis=1)
        else:
            prev = np.maximum(T - wn[None, :], 0.0)
            loc = np.sum(mask * ud[near][None, :] * (T**ex - prev**ex), axis=1) ** (1.0 / ell)
        table[i] = scale * loc * scaling
    return _report(table, c, r)


def morrey_norm(f: SampledFunction, p: float, lam: float, beta: float,
                radii=None, centers=None) -> NormReport:
    """sup over balls of R^{-beta(1/p - 1/lam)} (int_{B_R} |f|^p dmu)^{1/p}."""
    _check_exponents(p, p)
    if not (p <= lam):
        warnings.warn("p > lambda: outside the Morrey range", stacklevel=2)
    r, c = _resolve(f, radii, centers)
    mu = f.measure
    m = mu.weights * np.abs(f.values) ** p
    scaling = r ** (-beta * (1.0 / p - 1.0 / lam))
    table = np.zeros((c.shape[0], r.size))
    for i, x in enumerate(c):
        d = np.linalg.norm(mu.points - x, axis=1)
        o = np.argsort(d, kind="stable")
        cm = np.concatenate([[0.0], np.cumsum(m[o])])
        table[i] = cm[np.searchsorted(d[o], r, side="left")] ** (1.0 / p) * scaling
    return _report(table, c, r)
