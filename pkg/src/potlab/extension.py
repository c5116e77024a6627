"""Reflection-type extension from the half-space {x_n >= 0}, gradients and traces.

The extension is ``Ef(x', x_n) = int_1^inf f(x', (1 - 2s) x_n) psi(s) ds`` for
x_n < 0 and ``Ef = f`` otherwise, with psi a two-exponential kernel whose
zeroth and first moments are 1 and 0.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .lorentz import SampledFunction
from .measure import DiscreteMeasure
from .operators import GridFunction


@dataclass(frozen=True)
class PsiKernel:
    """psi(s) = a e^{-(s-1)} + b e^{-2(s-1)} on [1, inf), truncated at ``s_max`` for quadrature."""

    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray
    s_max: float

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return self.a * np.exp(-(s - 1)) + self.b * np.exp(-2 * (s - 1))

    def moment(self, k: int) -> float:
        """Closed-form int_1^inf s^k psi(s) ds."""
        return sum(c * _exp_moment(rate, k) for c, rate in ((self.a, 1), (self.b, 2)))

    def quad_moment(self, k: int) -> float:
        return float(np.sum(self.weights * self(self.nodes) * self.nodes**k))

    def reflection_factor(self) -> float:
        """int_1^inf (1 - 2s) psi(s) ds: the value of E applied to x_n, divided by x_n."""
        return self.moment(0) - 2 * self.moment(1)

    def gradient_constant(self, lam: float) -> float:
        """int_1^inf (2s - 1)^{2 - 1/lam} |psi(s)| ds by quadrature."""
        s = self.nodes
        return float(np.sum(self.weights * (2 * s - 1) ** (2 - 1 / lam) * np.abs(self(s))))


def _exp_moment(rate: float, k: int) -> float:
    """int_1^inf s^k e^{-rate (s-1)} ds = sum_j C(k, j) j! / rate^{j+1}."""
    return sum(math.comb(k, j) * math.factorial(j) / rate ** (j + 1) for j in range(k + 1))


def build_psi(s_max: float = 30.0, n_nodes: int = 200) -> PsiKernel:
    """Solve for (a, b) giving moments (1, 0); Gauss-Legendre nodes on [1, s_max]."""
    A = np.array([[_exp_moment(1, 0), _exp_moment(2, 0)],
                  [_exp_moment(1, 1), _exp_moment(2, 1)]])
    a, b = np.linalg.solve(A, [1.0, 0.0])
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    half = 0.5 * (s_max - 1)
    return PsiKernel(float(a), float(b), 1 + half * (x + 1), half * w, float(s_max))


def _reflection_matrix(nz: int, h: float, L: float, psi: PsiKernel):
    """K with (Ef)_lower[..., k] = sum_i K[k, i] f[..., i], lower cell k centred at -(k + 1/2) h.

    f is linear between the centres (k + 1/2) h, continued linearly up to L and
    zero beyond.  Returns (K, reaches_beyond_L).
    """
    z = (np.arange(nz) + 0.5) * h
    arg = (2 * psi.nodes[None, :] - 1) * z[:, None]  # (nz, q)
    wq = psi.weights * psi(psi.nodes)
    pos = arg / h - 0.5
    if nz == 1:
        i0 = np.zeros_like(pos, dtype=int)
        theta = np.zeros_like(pos)
    else:
        i0 = np.clip(np.floor(pos).astype(int), 0, nz - 2)
        theta = pos - i0
    inside = arg <= L * (1 + 1e-12)
    K = np.zeros((nz, nz))
    rows = np.broadcast_to(np.arange(nz)[:, None], arg.shape)
    wk = np.where(inside, wq[None, :], 0.0)
    np.add.at(K, (rows, i0), wk * (1 - theta))
    if nz > 1:
        np.add.at(K, (rows, i0 + 1), wk * theta)
    return K, bool((~inside).any())


def extend_half_space(f: GridFunction, psi: PsiKernel | None = None) -> GridFunction:
    """Extend f (grid with last axis starting at x_n = 0) to x_n in [-L, L]."""
    psi = build_psi() if psi is None else psi
    if abs(f.origin[-1]) > 1e-12 * max(1.0, float(f.spacing[-1])):
        raise ValueError("no boundary data: grid must start at x_n = 0")
    nz = f.shape[-1]
    h = float(f.spacing[-1])
    L = nz * h
    K, beyond = _reflection_matrix(nz, h, L, psi)
    top = f.values[..., -1]
    if beyond and np.any(top != 0):
        warnings.warn("f does not vanish near x_n = L; using its zero extension", stacklevel=2)
    lower = f.values @ K.T  # lower[..., k] sits at -(k + 1/2) h
    values = np.concatenate([lower[..., ::-1], f.values], axis=-1)
    origin = f.origin.copy()
    origin[-1] = -L
    return GridFunction(origin, f.spacing, values)


def gradient(f: GridFunction) -> list:
    """Central differences inside, one-sided at the faces; one GridFunction per axis."""
    if any(s < 2 for s in f.shape):
        raise ValueError("axis too short")
    return [f.with_values(np.gradient(f.values, f.spacing[i], axis=i, edge_order=1))
            for i in range(f.dim)]


def gradient_magnitude(f: GridFunction) -> GridFunction:
    parts = gradient(f)
    return f.with_values(np.sqrt(sum(g.values**2 for g in parts)))


def boundary_trace(f: GridFunction, plane: DiscreteMeasure) -> SampledFunction:
    """f interpolated (multilinearly, extrapolating at the faces) at the atoms of ``plane``."""
    pts = plane.points
    if pts.shape[1] != f.dim:
        raise ValueError("dimension mismatch")
    lo, hi = f.origin, f.upper
    if np.any(pts < lo - 1e-12) or np.any(pts > hi + 1e-12):
        raise ValueError("trace plane outside domain")
    axes = f.axes()
    if any(a.size < 2 for a in axes):
        raise ValueError("axis too short")
    interp = RegularGridInterpolator(axes, f.values, method="linear", bounds_error=False, fill_value=None)
    return SampledFunction(plane, interp(pts))
