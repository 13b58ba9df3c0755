"""P1 finite elements on a 1D mesh with zero Dirichlet data.

Vectors hold the interior nodal values (length M-1).  Batched routines accept
arrays of shape (..., M-1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import LinAlgError, solveh_banded

from .core import ConfigError, SpaceMesh


class SingularSystemError(ArithmeticError):
    pass


def gauss_rule(n: int):
    """Gauss-Legendre nodes/weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


@dataclass(frozen=True)
class Tridiag:
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diag)

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        out = self.diag * v
        out[..., 1:] += self.lower * v[..., :-1]
        out[..., :-1] += self.upper * v[..., 1:]
        return out

    __matmul__ = matvec

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)

    def scaled_add(self, c: float, other: "Tridiag") -> "Tridiag":
        """Return c*self + other."""
        return Tridiag(c * self.lower + other.lower, c * self.diag + other.diag,
                       c * self.upper + other.upper)


def solve_tridiag_spd(Amat: Tridiag, rhs):
    """Cholesky solve of a symmetric positive definite tridiagonal system.

    ``rhs`` may be a vector or a stack of vectors (..., m).
    """
    rhs = np.asarray(rhs, dtype=float)
    ab = np.zeros((2, Amat.size))
    ab[0, 1:] = Amat.upper
    ab[1] = Amat.diag
    b = rhs.reshape(-1, Amat.size).T
    if Amat.size == 1:
        if not Amat.diag[0] > 0:
            raise SingularSystemError("nonpositive pivot in SPD solve")
        return (b / Amat.diag[0]).T.reshape(rhs.shape)
    try:
        x = solveh_banded(ab, b, lower=False, check_finite=True)
    except LinAlgError as exc:
        raise SingularSystemError(f"nonpositive pivot in SPD solve: {exc}") from exc
    return x.T.reshape(rhs.shape)


def _check_coefficient(vals):
    if not np.all(np.asarray(vals) > 0):
        raise ConfigError("coercivity violated: diffusion coefficient must be positive",
                          [("diffusion", float(np.min(vals)), "coercivity violated")])


def assemble_mass(mesh: SpaceMesh) -> Tridiag:
    h = mesh.h
    diag = (h[:-1] + h[1:]) / 3
    off = h[1:-1] / 6
    return Tridiag(off.copy(), diag, off.copy())


def element_integrals(mesh: SpaceMesh, A: Callable, npts: int = 3) -> np.ndarray:
    """int_K A dx for every element K (Gauss rule with ``npts`` points)."""
    g, w = gauss_rule(npts)
    x = mesh.coords[:-1, None] + mesh.h[:, None] * g
    vals = np.broadcast_to(np.asarray(A(x), dtype=float), x.shape)
    _check_coefficient(vals)
    return mesh.h * (vals @ w)


def assemble_stiffness(mesh: SpaceMesh, A: Callable) -> Tridiag:
    Abar = element_integrals(mesh, A, 3) / mesh.h ** 2
    diag = Abar[:-1] + Abar[1:]
    off = -Abar[1:-1]
    return Tridiag(off.copy(), diag, off.copy())


def load_vector(g: Callable, mesh: SpaceMesh, npts: int = 5) -> np.ndarray:
    """<g, phi_i> for interior hats, ``npts``-point Gauss per element."""
    q, w = gauss_rule(npts)
    x = mesh.coords[:-1, None] + mesh.h[:, None] * q
    gv = np.broadcast_to(np.asarray(g(x), dtype=float), x.shape)
    wh = mesh.h[:, None] * w
    right = (gv * wh * q).sum(axis=1)        # hat rising on element e: node e+1
    left = (gv * wh * (1 - q)).sum(axis=1)   # hat falling on element e: node e
    return right[:-1] + left[1:]


def l2_project(g: Callable, mesh: SpaceMesh, Mmat: Optional[Tridiag] = None) -> np.ndarray:
    Mmat = assemble_mass(mesh) if Mmat is None else Mmat
    return solve_tridiag_spd(Mmat, load_vector(g, mesh))


def discrete_elliptic_apply(v, Mmat: Tridiag, Kmat: Tridiag):
    """Coefficients of A_h v, i.e. w with M w = K v."""
    return solve_tridiag_spd(Mmat, Kmat.matvec(v))


def _with_boundary(v):
    v = np.asarray(v, dtype=float)
    pad = [(0, 0)] * (v.ndim - 1) + [(1, 1)]
    return np.pad(v, pad)


def slopes(v, mesh: SpaceMesh):
    return np.diff(_with_boundary(v), axis=-1) / mesh.h


def flux_jumps(v, mesh: SpaceMesh, A: Callable):
    """J_i = A(x_i) (v'|right - v'|left) at interior nodes.

    With this orientation a(v, phi) = sum_K <A_el v, phi>_K - sum_i J_i phi(x_i).
    """
    s = slopes(v, mesh)
    Ai = np.broadcast_to(np.asarray(A(mesh.coords[1:-1]), dtype=float), (mesh.M - 1,))
    return Ai * (s[..., 1:] - s[..., :-1])


def _derivative(fun: Callable, x, step: float = 1e-6):
    return (np.asarray(fun(x + step), dtype=float) - np.asarray(fun(x - step), dtype=float)) / (2 * step)


class FESpace:
    """P1 space on a fixed mesh with cached matrices and quadrature data."""

    NQ = 5

    def __init__(self, mesh: SpaceMesh, A: Callable, A_prime: Optional[Callable] = None):
        self.mesh = mesh
        self.A = A
        self.A_prime = A_prime
        self.M = assemble_mass(mesh)
        self.K = assemble_stiffness(mesh, A)
        self.K1 = assemble_stiffness(mesh, lambda x: np.ones_like(x))
        h = mesh.h
        self.h = h
        self.hbar = (h[:-1] + h[1:]) / 2
        q, w = gauss_rule(self.NQ)
        self.q, self.w = q, w
        self.xq = mesh.coords[:-1, None] + h[:, None] * q        # (M, NQ)
        self.wq = h[:, None] * w
        Aq = np.broadcast_to(np.asarray(A(self.xq), dtype=float), self.xq.shape)
        _check_coefficient(Aq)
        self.eta = float(Aq.min())
        self.beta = float(Aq.max())
        dA = A_prime(self.xq) if A_prime is not None else _derivative(A, self.xq)
        self.dAq = np.broadcast_to(np.asarray(dA, dtype=float), self.xq.shape)
        self.Anodes = np.broadcast_to(np.asarray(A(mesh.coords[1:-1]), dtype=float), (mesh.M - 1,))

    @property
    def n(self) -> int:
        return self.mesh.M - 1

    # --- functions on quadrature points -------------------------------------------
    def at_quad(self, v):
        """Values of the P1 function(s) v at the quadrature points, shape (..., M, NQ)."""
        vb = _with_boundary(v)
        return vb[..., :-1, None] * (1 - self.q) + vb[..., 1:, None] * self.q

    def sample(self, g: Callable, *args):
        return np.broadcast_to(np.asarray(g(self.xq, *args), dtype=float), self.xq.shape)

    def l2_norm_fun(self, values):
        """L2 norm of a function given at quadrature points, shape (..., M, NQ)."""
        return np.sqrt(np.maximum((values ** 2 * self.wq).sum(axis=(-2, -1)), 0.0))

    # --- algebra ------------------------------------------------------------------
    def inner(self, v, w):
        return np.sum(np.asarray(v) * self.M.matvec(w), axis=-1)

    def l2_norm(self, v):
        return np.sqrt(np.maximum(self.inner(v, v), 0.0))

    def energy(self, v, w):
        return np.sum(np.asarray(v) * self.K.matvec(w), axis=-1)

    def h1_norm(self, v):
        v = np.asarray(v, dtype=float)
        return np.sqrt(np.maximum(np.sum(v * (self.M.matvec(v) + self.K1.matvec(v)), axis=-1), 0.0))

    def project(self, g: Callable) -> np.ndarray:
        return l2_project(g, self.mesh, self.M)

    def interpolate(self, g: Callable) -> np.ndarray:
        x = self.mesh.coords[1:-1]
        return np.broadcast_to(np.asarray(g(x), dtype=float), x.shape).copy()

    def Ah(self, v):
        return discrete_elliptic_apply(v, self.M, self.K)

    def jumps(self, v):
        s = slopes(v, self.mesh)
        return self.Anodes * (s[..., 1:] - s[..., :-1])

    def element_operator(self, v):
        """-(A v')' elementwise at quadrature points (= -A' v' for P1 v)."""
        return -self.dAq * slopes(v, self.mesh)[..., :, None]

    # --- residual indicators --------------------------------------------------------
    def indicator(self, v, p_el: float, p_jump: float):
        """||h^p_el (A_el - A_h) v|| + ||J_A[v] hbar^p_jump||_Sigma (unit constants)."""
        v = np.asarray(v, dtype=float)
        r = self.element_operator(v) - self.at_quad(self.Ah(v))
        el = np.sqrt((r ** 2 * (self.h ** (2 * p_el))[:, None] * self.wq).sum(axis=(-2, -1)))
        jp = np.sqrt(((self.jumps(v) * self.hbar ** p_jump) ** 2).sum(axis=-1))
        return el + jp

    def Ee0(self, v):
        return self.indicator(v, 2.0, 1.5)

    def Ee1(self, v):
        return self.indicator(v, 1.0, 0.5)

    def Eres(self, v):
        """Unweighted member of the same family; stands in for ||(A - A_h) v||."""
        return self.indicator(v, 0.0, -0.5)


def indicator_Ee0(v, space: FESpace):
    return space.Ee0(v)


def indicator_Ee1(v, space: FESpace):
    return space.Ee1(v)
