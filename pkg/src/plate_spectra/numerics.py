"""Self-contained numerical kernels: bracketed root finding, Gauss-Legendre
tensor quadrature with breakpoints, and a cyclic-Jacobi symmetric eigensolver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class NumericsError(Exception):
    pass


class NoSignChange(NumericsError):
    """Root bracket endpoints do not straddle a sign change."""


class NonFinite(NumericsError):
    """A function sample came back nan or inf."""


class NoConvergence(NumericsError):
    """Iteration cap exceeded."""


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


def find_root(f: Callable[[float], float], bracket: Bracket,
              tol_rel: float = 1e-12, polish: bool = False) -> float:
    """Bisection root of f on the bracket, to relative width tol_rel.

    The sign condition f(lo)*f(hi) < 0 is verified at solve time. With
    polish=True a few guarded secant steps refine the bisection result
    (still deterministic).
    """
    lo, hi = float(bracket.lo), float(bracket.hi)
    flo, fhi = float(f(lo)), float(f(hi))
    if not (math.isfinite(flo) and math.isfinite(fhi)):
        raise NonFinite(f"f non-finite at bracket endpoints: f({lo})={flo}, f({hi})={fhi}")
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo < 0.0) == (fhi < 0.0):
        raise NoSignChange(f"f({lo})={flo} and f({hi})={fhi} have the same sign")

    scale = max(1.0, abs(lo), abs(hi))
    while hi - lo > tol_rel * scale:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # interval at floating point resolution
        fmid = float(f(mid))
        if not math.isfinite(fmid):
            raise NonFinite(f"f({mid}) = {fmid}")
        if fmid == 0.0:
            return mid
        if (fmid < 0.0) == (flo < 0.0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid

    root = 0.5 * (lo + hi)
    if polish:
        a, fa, b, fb = lo, flo, hi, fhi
        for _ in range(3):
            if fb == fa:
                break
            x = b - fb * (b - a) / (fb - fa)
            if not lo <= x <= hi:
                break
            fx = float(f(x))
            if not math.isfinite(fx):
                raise NonFinite(f"f({x}) = {fx}")
            a, fa, b, fb = b, fb, x, fx
            if fx == 0.0:
                break
        root = b
    return root


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

GAUSS_LEGENDRE = "gauss-legendre"
COMPOSITE_MIDPOINT = "composite-midpoint"


@dataclass(frozen=True)
class QuadratureRule:
    """1D rule on [a, b] split at breakpoints into smooth pieces.

    order is the Gauss-Legendre order per piece, or the cell count per piece
    for the composite midpoint rule.
    """

    a: float
    b: float
    kind: str = GAUSS_LEGENDRE
    order: int = 24
    breakpoints: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise ValueError(f"empty interval [{self.a}, {self.b}]")
        if self.kind not in (GAUSS_LEGENDRE, COMPOSITE_MIDPOINT):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.order < 1:
            raise ValueError(f"order must be positive, got {self.order}")
        pts = tuple(float(t) for t in self.breakpoints)
        if any(t2 <= t1 for t1, t2 in zip(pts, pts[1:])):
            raise ValueError(f"breakpoints must be strictly increasing: {pts}")
        if pts and not (self.a < pts[0] and pts[-1] < self.b):
            raise ValueError(f"breakpoints must lie strictly inside ({self.a}, {self.b})")
        object.__setattr__(self, "breakpoints", pts)

    def pieces(self) -> list[tuple[float, float]]:
        edges = [self.a, *self.breakpoints, self.b]
        return list(zip(edges[:-1], edges[1:]))

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Concatenated nodes and weights over all pieces (fixed order)."""
        xs: list[np.ndarray] = []
        ws: list[np.ndarray] = []
        if self.kind == GAUSS_LEGENDRE:
            ref_x, ref_w = np.polynomial.legendre.leggauss(self.order)
            for (a, b) in self.pieces():
                xs.append(0.5 * (b - a) * ref_x + 0.5 * (a + b))
                ws.append(0.5 * (b - a) * ref_w)
        else:
            for (a, b) in self.pieces():
                h = (b - a) / self.order
                xs.append(a + h * (np.arange(self.order) + 0.5))
                ws.append(np.full(self.order, h))
        return np.concatenate(xs), np.concatenate(ws)


def integrate_1d(f: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule) -> float:
    """Integrate f over the rule's interval. f must accept ndarray input."""
    x, w = rule.nodes_weights()
    vals = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFinite("non-finite integrand sample in integrate_1d")
    return float(w @ vals)


def integrate_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 rule_x: QuadratureRule, rule_y: QuadratureRule) -> float:
    """Tensor-product integral of f(x, y). f must broadcast over ndarrays."""
    x, wx = rule_x.nodes_weights()
    y, wy = rule_y.nodes_weights()
    vals = np.asarray(f(x[:, None], y[None, :]), dtype=float)
    if vals.shape != (x.size, y.size):
        vals = np.broadcast_to(vals, (x.size, y.size))
    if not np.all(np.isfinite(vals)):
        raise NonFinite("non-finite integrand sample in integrate_2d")
    return float(wx @ vals @ wy)


# ---------------------------------------------------------------------------
# dense symmetric eigensolver
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Dense symmetric matrix; symmetry is exact by construction."""

    a: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFinite("non-finite entries in SymMatrix")
        # mirror the upper triangle so A is bitwise symmetric
        sym = np.triu(a) + np.triu(a, 1).T
        object.__setattr__(self, "a", sym)

    @property
    def n(self) -> int:
        return self.a.shape[0]


def sym_eig(matrix: SymMatrix | np.ndarray, tol: float = 1e-14,
            max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns (eigenvalues ascending, eigenvectors as orthonormal columns).
    Deterministic: fixed sweep order, fixed sign convention (largest-magnitude
    component of each eigenvector is positive).
    """
    if isinstance(matrix, SymMatrix):
        A = matrix.a.copy()
    else:
        A = SymMatrix(np.asarray(matrix, dtype=float)).a.copy()
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return A[0, :1].copy(), V

    fro = float(np.linalg.norm(A))
    if fro == 0.0:
        return np.zeros(n), V
    skip = tol * fro / (10.0 * n)

    def _off_norm(mat: np.ndarray) -> float:
        off = mat.copy()
        np.fill_diagonal(off, 0.0)
        return float(np.linalg.norm(off))

    converged = False
    for _ in range(max_sweeps):
        if _off_norm(A) <= tol * fro:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= skip:
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # similarity rotation in the (p, q) plane
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                v_p = V[:, p].copy()
                v_q = V[:, q].copy()
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q
    if not converged:
        off = _off_norm(A)
        if off > tol * fro:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps "
                                f"(off-diagonal norm {off:.3e} vs target {tol * fro:.3e})")

    evals = np.diag(A).copy()
    order = np.argsort(evals, kind="stable")
    evals = evals[order]
    vecs = V[:, order]
    for i in range(n):
        k = int(np.argmax(np.abs(vecs[:, i])))
        if vecs[k, i] < 0:
            vecs[:, i] = -vecs[:, i]
    return evals, vecs
