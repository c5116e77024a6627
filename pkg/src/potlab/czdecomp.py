"""Doubling cubes and a stopping-time Calderon-Zygmund decomposition for
non-doubling discrete measures.

Cubes are half-open, ``[lo, lo + side)`` on every axis, so dyadic children
partition their parent and every atom is counted once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lorentz import SampledFunction
from .measure import DiscreteMeasure
from .operators import GridFunction, mean_oscillation, riesz_potential_field

MAX_DEPTH = 40


@dataclass(frozen=True)
class Cube:
    lo: tuple
    side: float
    level: Optional[int] = None
    index: Optional[tuple] = None

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.lo) + self.side

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.lo) + 0.5 * self.side

    def dilate(self, tau: float) -> "Cube":
        """Concentric cube with side ``tau * side``."""
        return Cube(tuple(self.center - 0.5 * tau * self.side), tau * self.side)

    def contains_point(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= np.asarray(self.lo)) & (x < self.hi)))

    def intersects(self, other: "Cube") -> bool:
        a_lo, b_lo = np.asarray(self.lo), np.asarray(other.lo)
        return bool(np.all((a_lo < other.hi) & (b_lo < self.hi)))

    def to_dict(self) -> dict:
        return {"level": self.level, "index": None if self.index is None else list(self.index),
                "center": self.center.tolist(), "side": self.side}


def root_cube(mu: DiscreteMeasure, pad: float = 0.0) -> Cube:
    """Smallest axis-aligned cube (plus ``pad`` on each side) whose half-open
    interior holds every atom."""
    lo = mu.points.min(axis=0) - pad
    hi = mu.points.max(axis=0) + pad
    side = float(np.max(hi - lo))
    side = side * (1 + 1e-9) + 1e-12 if side > 0 else 1.0
    return Cube(tuple(lo), side, 0, tuple([0] * mu.dim))


def dyadic_cube(root: Cube, level: int, index) -> Cube:
    side = root.side * 2.0**-level
    index = tuple(int(i) for i in index)
    lo = tuple(float(l) + i * side for l, i in zip(root.lo, index))
    return Cube(lo, side, level, index)


def dyadic_cube_at(root: Cube, x, level: int) -> Cube:
    side = root.side * 2.0**-level
    idx = np.floor((np.asarray(x, dtype=float) - np.asarray(root.lo)) / side).astype(int)
    return dyadic_cube(root, level, idx)


def cube_mass(mu: DiscreteMeasure, Q: Cube) -> float:
    return float(mu.weights[mu.box_indices(Q.lo, Q.hi)].sum())


def is_doubling(mu: DiscreteMeasure, Q: Cube, tau: float = 2.0, gamma: Optional[float] = None) -> bool:
    """mu(tau Q) <= gamma mu(Q); empty cubes count as doubling."""
    gamma = 2.0 ** (mu.dim + 1) if gamma is None else gamma
    m = cube_mass(mu, Q)
    if m == 0:
        return True
    return cube_mass(mu, Q.dilate(tau)) <= gamma * m


def _isolation_level(mu: DiscreteMeasure, root: Cube, x, max_depth: int) -> int:
    """First level whose dyadic cube around x and its double hold a single atom."""
    for k in range(max_depth + 1):
        Q = dyadic_cube_at(root, x, k)
        if mu.box_indices(*_box(Q.dilate(2))).size <= 1:
            return k
    raise RuntimeError(f"depth limit: no isolating cube around {np.asarray(x).tolist()} "
                       f"within {max_depth} levels")


def _box(Q: Cube):
    return np.asarray(Q.lo), Q.hi


def find_doubling_cube(mu: DiscreteMeasure, x, direction: str = "shrink", scale: Optional[float] = None,
                       root: Optional[Cube] = None, tau: float = 2.0, gamma: Optional[float] = None,
                       max_depth: int = MAX_DEPTH) -> Cube:
    """Dyadic doubling cube containing ``x``.

    ``shrink``: the largest doubling cube of side at most ``scale`` (default: the
    side at which x is isolated from the other atoms).  ``grow``: the smallest
    doubling cube of side greater than ``scale`` (default: the root side).
    """
    root = root_cube(mu) if root is None else root
    if direction == "shrink":
        if scale is None:
            start = _isolation_level(mu, root, x, max_depth)
        else:
            start = max(0, int(math.ceil(math.log2(root.side / scale) - 1e-12)))
        for k in range(start, max_depth + 1):
            Q = dyadic_cube_at(root, x, k)
            if is_doubling(mu, Q, tau, gamma):
                return Q
        raise RuntimeError(f"depth limit: no doubling cube at levels {start}..{max_depth}")
    if direction == "grow":
        scale = root.side if scale is None else scale
        k = int(math.floor(math.log2(root.side / scale) + 1e-12))
        if root.side * 2.0**-k <= scale:
            k -= 1
        for level in range(k, k - max_depth - 1, -1):
            Q = dyadic_cube_at(root, x, level)
            if is_doubling(mu, Q, tau, gamma):
                return Q
        raise RuntimeError("depth limit: no big doubling cube found")
    raise ValueError("direction must be 'shrink' or 'grow'")


@dataclass
class CZResult:
    cubes: list
    averages: np.ndarray
    families: list  # lists of indices into ``cubes``
    exceptional_ok: bool
    threshold: float
    meta: dict = field(default_factory=dict)

    @property
    def family_count(self) -> int:
        return len(self.families)

    def total_mass(self, mu: DiscreteMeasure) -> float:
        return float(sum(cube_mass(mu, Q) for Q in self.cubes))

    def to_rows(self) -> list:
        fam = {}
        for f_id, members in enumerate(self.families):
            for j in members:
                fam[j] = f_id
        rows = []
        for j, Q in enumerate(self.cubes):
            d = Q.to_dict()
            d.update(average=float(self.averages[j]), family=fam[j])
            rows.append(d)
        return rows


def _avg(mu: DiscreteMeasure, absg: np.ndarray, Q: Cube):
    idx = mu.box_indices(Q.lo, Q.hi)
    m = float(mu.weights[idx].sum())
    if m == 0:
        return 0.0, 0.0
    return m, float(np.dot(mu.weights[idx], absg[idx])) / m


def _candidates(root: Cube, x, top_level: int, bottom_level: int, per_octave: int):
    """Dyadic cubes around x from ``top_level`` down, then cubes centred at x."""
    for k in range(top_level, bottom_level + 1):
        yield dyadic_cube_at(root, x, k)
    x = np.asarray(x, dtype=float)
    s_top = root.side * 2.0**-top_level
    s_bottom = root.side * 2.0**-bottom_level
    m = int(math.ceil(per_octave * math.log2(s_top / s_bottom)))
    for j in range(m + 1):
        s = s_top * 2.0 ** (-j / per_octave)
        yield Cube(tuple(x - 0.5 * s), s)


def greedy_families(cubes: list) -> list:
    """Colour cubes into pairwise-disjoint families, largest first."""
    order = sorted(range(len(cubes)), key=lambda j: (-cubes[j].side, j))
    families: list = []
    for j in order:
        for fam in families:
            if not any(cubes[j].intersects(cubes[i]) for i in fam):
                fam.append(j)
                break
        else:
            families.append([j])
    return [sorted(f) for f in families]


def cz_decompose(g: SampledFunction, lam: float, root: Optional[Cube] = None,
                 max_depth: int = MAX_DEPTH, per_octave: int = 8) -> CZResult:
    """Select (2, 2^{n+1})-doubling cubes with averages of |g| in (lam, 4^{n+1} lam]
    covering every atom of ``root`` where |g| > lam.

    For each uncovered exceeding atom (largest |g| first) the largest admissible
    cube among its dyadic ancestors and the cubes centred at it is kept.  The
    kept cubes are then split greedily into pairwise-disjoint families.
    """
    mu = g.measure
    n = mu.dim
    root = root_cube(mu) if root is None else root
    absg = np.abs(g.values)
    m0, a0 = _avg(mu, absg, root)
    if m0 == 0 or not (lam > a0):
        raise ValueError("threshold too small")
    upper = 4.0 ** (n + 1) * lam
    in_root = mu.box_indices(root.lo, root.hi)
    exceed = in_root[absg[in_root] > lam]
    exceed = exceed[np.argsort(-absg[exceed], kind="stable")]
    covered = np.zeros(len(mu), dtype=bool)
    cubes, avgs = [], []
    fallback = 0
    for i in exceed:
        if covered[i]:
            continue
        x = mu.points[i]
        bottom = _isolation_level(mu, root, x, max_depth)
        best = None
        loose = None
        for Q in _candidates(root, x, 0, bottom, per_octave):
            m, a = _avg(mu, absg, Q)
            if m == 0 or a <= lam or not is_doubling(mu, Q):
                continue
            if a <= upper:
                if best is None or Q.side > best[0].side:
                    best = (Q, a)
            elif loose is None or Q.side > loose[0].side:
                loose = (Q, a)
        if best is None:
            fallback += 1
            best = loose
        if best is None:
            raise RuntimeError(f"depth limit: no doubling cube above threshold at atom {i}")
        Q, a = best
        cubes.append(Q)
        avgs.append(a)
        covered[mu.box_indices(Q.lo, Q.hi)] = True
    ok = bool(np.all(covered[exceed])) if exceed.size else True
    return CZResult(cubes, np.asarray(avgs), greedy_families(cubes), ok, lam,
                    {"fallbacks": fallback, "root": root})


def cz_violations(result: CZResult, g: SampledFunction) -> dict:
    """Count violations of the decomposition's guarantees (all zero when correct)."""
    mu = g.measure
    n = mu.dim
    lam = result.threshold
    absg = np.abs(g.values)
    out = {"doubling": 0, "average": 0, "disjoint": 0, "coverage": 0}
    for Q, a in zip(result.cubes, result.averages):
        if not is_doubling(mu, Q):
            out["doubling"] += 1
        if not (lam < a <= 4.0 ** (n + 1) * lam):
            out["average"] += 1
    for fam in result.families:
        for x, i in enumerate(fam):
            for j in fam[x + 1:]:
                if result.cubes[i].intersects(result.cubes[j]):
                    out["disjoint"] += 1
    root = result.meta.get("root") or root_cube(mu)
    in_root = mu.box_indices(root.lo, root.hi)
    covered = np.zeros(len(mu), dtype=bool)
    for Q in result.cubes:
        covered[mu.box_indices(Q.lo, Q.hi)] = True
    out["coverage"] = int(np.sum((absg[in_root] > lam) & ~covered[in_root]))
    return out


def dyadic_sharp_maximal(g: SampledFunction, root: Cube, depth: int, extra_cubes=()) -> np.ndarray:
    """Uncentred sharp maximal function at every atom over the dyadic cubes of
    ``root`` down to ``depth`` plus ``extra_cubes``; atoms outside root get 0."""
    mu = g.measure
    pts = mu.points
    inside = np.all((pts >= np.asarray(root.lo)) & (pts < root.hi), axis=1)
    out = np.zeros(len(mu))
    w, v = mu.weights, g.values
    rel = (pts[inside] - np.asarray(root.lo)) / root.side
    sub = np.flatnonzero(inside)
    for k in range(depth + 1):
        keys = np.floor(rel * 2**k).astype(np.int64)
        _, inv = np.unique(keys, axis=0, return_inverse=True)
        inv = inv.ravel()
        m = np.bincount(inv, weights=w[sub])
        mean = np.bincount(inv, weights=w[sub] * v[sub]) / m
        dev = np.bincount(inv, weights=w[sub] * np.abs(v[sub] - mean[inv])) / m
        out[sub] = np.maximum(out[sub], dev[inv])
    for Q in extra_cubes:
        idx = mu.box_indices(Q.lo, Q.hi)
        if idx.size:
            out[idx] = np.maximum(out[idx], mean_oscillation(g, idx))
    return out


@dataclass
class GoodLambdaReport:
    t: float
    s: float
    epsilon: float
    lhs: float
    sharp_mass: float
    s_cube_mass: float
    rhs: float
    slack: float
    margin: float
    passed: bool
    s_root_used: bool


def good_lambda_epsilon(n: int, p: float = 1.0, ell: Optional[float] = None) -> float:
    """epsilon solving epsilon^{ell/p} 4^{(n+2) ell} = 1/2."""
    ell = p if ell is None else ell
    return (0.5 * 4.0 ** (-(n + 2) * ell)) ** (p / ell)


def verify_good_lambda(f: GridFunction, mu: DiscreteMeasure, alpha: float, t: float,
                       epsilon: Optional[float] = None, root: Optional[Cube] = None,
                       depth: int = 12, tol: float = 1e-9) -> GoodLambdaReport:
    """Check sum_j mu(Q_j^t) <= mu({M# I_alpha f > 3 eps t / 4}) + eps sum_j mu(Q_j^s), s = 4^{-n-2} t.

    When s does not exceed the root average, the root itself stands in for the
    level-s family (every atom of the root then exceeds s on average).
    """
    n = mu.dim
    epsilon = good_lambda_epsilon(n) if epsilon is None else epsilon
    root = root_cube(mu) if root is None else root
    field_ = riesz_potential_field(f, alpha, mu)
    g = SampledFunction(mu, np.abs(field_.values))
    s = 4.0 ** (-n - 2) * t
    _, a0 = _avg(mu, g.values, root)
    if a0 >= t:
        raise ValueError("threshold too small")
    cz_t = cz_decompose(g, t, root)
    if s > a0:
        cz_s = cz_decompose(g, s, root)
        s_cubes, s_root = cz_s.cubes, False
    else:
        s_cubes, s_root = [root], True
    sharp = dyadic_sharp_maximal(field_, root, depth, list(cz_t.cubes) + list(s_cubes))
    in_root = mu.box_indices(root.lo, root.hi)
    sharp_mass = float(mu.weights[in_root][sharp[in_root] > 0.75 * epsilon * t].sum())
    lhs = float(sum(cube_mass(mu, Q) for Q in cz_t.cubes))
    s_mass = float(sum(cube_mass(mu, Q) for Q in s_cubes))
    rhs = sharp_mass + epsilon * s_mass
    margin = tol * max(mu.total_mass, 1e-300)
    slack = rhs - lhs
    return GoodLambdaReport(t, s, epsilon, lhs, sharp_mass, s_mass, rhs, slack, margin,
                            slack >= -margin, s_root)
