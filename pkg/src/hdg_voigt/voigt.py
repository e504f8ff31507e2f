"""Voigt-notation operators and the isotropic constitutive law.

Symmetric tensors are stored as vectors of length ``msd = nsd (nsd + 1) / 2``::

    2D: [s11, s22, s12]
    3D: [s11, s22, s33, s12, s13, s23]

Strains use engineering shear components (doubled), stresses do not.
The symmetric gradient and the normal matrix are both written in terms of
the expansion matrices ``E_k``::

    grad_S = sum_k E_k d/dx_k,      N(n) = sum_k E_k n_k
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

PLANE_STRAIN = "plane_strain"
PLANE_STRESS = "plane_stress"

_UNIT_TOL = 1e-10


class MaterialError(ValueError):
    """Raised for Poisson ratios outside ``[0, 0.5)`` or non-positive moduli."""


class IncompressibleLimitError(MaterialError):
    """Raised when ``nu >= 0.5``; the Hooke matrix no longer exists."""


class NormalisationError(ValueError):
    """Raised when a normal vector handed to a Voigt operator is not unit length."""


def msd_of(nsd: int) -> int:
    return nsd * (nsd + 1) // 2


def nrr_of(nsd: int) -> int:
    """Number of rigid rotations."""
    return 1 if nsd == 2 else 3


@dataclass(frozen=True)
class MaterialParams:
    youngs_modulus: float
    poisson_ratio: float
    plane_assumption: str = PLANE_STRAIN

    def __post_init__(self):
        if not self.youngs_modulus > 0:
            raise MaterialError(f"Young's modulus must be positive, got {self.youngs_modulus}")
        if self.poisson_ratio >= 0.5:
            raise IncompressibleLimitError(
                f"nu={self.poisson_ratio} reaches the incompressible limit (nu < 0.5 required)")
        if self.poisson_ratio < 0:
            raise MaterialError(f"auxetic materials are not supported, got nu={self.poisson_ratio}")
        if self.plane_assumption not in (PLANE_STRAIN, PLANE_STRESS):
            raise MaterialError(f"unknown plane assumption {self.plane_assumption!r}")


@dataclass(frozen=True)
class VoigtConstitutive:
    nsd: int
    D: np.ndarray
    Dhalf: np.ndarray
    params: MaterialParams | None = field(default=None, compare=False)

    @property
    def msd(self) -> int:
        return msd_of(self.nsd)


def expansion_matrices(nsd: int) -> np.ndarray:
    """Return the stack ``E[k]`` of msd x nsd 0/1 matrices, shape (nsd, msd, nsd)."""
    if nsd == 2:
        E = np.zeros((2, 3, 2))
        E[0, 0, 0] = E[0, 2, 1] = 1.0
        E[1, 2, 0] = E[1, 1, 1] = 1.0
        return E
    if nsd == 3:
        E = np.zeros((3, 6, 3))
        E[0, 0, 0] = E[0, 3, 1] = E[0, 4, 2] = 1.0
        E[1, 3, 0] = E[1, 1, 1] = E[1, 5, 2] = 1.0
        E[2, 4, 0] = E[2, 5, 1] = E[2, 2, 2] = 1.0
        return E
    raise ValueError(f"nsd must be 2 or 3, got {nsd}")


def sym_sqrt(A: np.ndarray) -> np.ndarray:
    """Symmetric square root via eigendecomposition (eigenvalues ascending)."""
    w, V = np.linalg.eigh(A)
    if w.size and w.min() < -1e-12 * max(abs(w).max(), 1.0):
        raise ValueError(f"matrix is not positive semidefinite (smallest eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)   # round-off only
    S = (V * np.sqrt(w)) @ V.T
    return 0.5 * (S + S.T)


def hooke_matrix(params: MaterialParams, nsd: int = 2) -> np.ndarray:
    E, nu = params.youngs_modulus, params.poisson_ratio
    if nsd == 2 and params.plane_assumption == PLANE_STRESS:
        c = E / (1.0 - nu**2)
        return c * np.array([[1.0, nu, 0.0],
                             [nu, 1.0, 0.0],
                             [0.0, 0.0, 0.5 * (1.0 - nu)]])
    c = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
    if nsd == 2:
        return c * np.array([[1.0 - nu, nu, 0.0],
                             [nu, 1.0 - nu, 0.0],
                             [0.0, 0.0, 0.5 * (1.0 - 2.0 * nu)]])
    if nsd == 3:
        D = np.zeros((6, 6))
        D[:3, :3] = nu
        D[np.arange(3), np.arange(3)] = 1.0 - nu
        D[np.arange(3, 6), np.arange(3, 6)] = 0.5 * (1.0 - 2.0 * nu)
        return c * D
    raise ValueError(f"nsd must be 2 or 3, got {nsd}")


def build_constitutive(params: MaterialParams, nsd: int = 2) -> VoigtConstitutive:
    """Hooke matrix ``D`` and its symmetric square root.

    For ``nsd=3`` the plane assumption is ignored.
    """
    D = hooke_matrix(params, nsd)
    return VoigtConstitutive(nsd=nsd, D=D, Dhalf=sym_sqrt(D), params=params)


def _check_unit(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n, axis=-1)
    if np.any(np.abs(norm - 1.0) > _UNIT_TOL):
        raise NormalisationError(f"normal must have unit length, got |n|={norm}")
    return n


def normal_matrix(n) -> np.ndarray:
    """``N(n) = sum_k E_k n_k`` (msd x nsd). ``N.T @ s_V`` is the traction ``n . s``.

    Accepts a single normal or a stack of normals (leading axes are kept).
    """
    n = _check_unit(n)
    E = expansion_matrices(n.shape[-1])
    return np.einsum("...k,kab->...ab", n, E)


def tangent_matrix(n) -> np.ndarray:
    """Tangent operator ``T(n)`` (nsd x nrr), as printed in the method's definition.

    In 2D this is the column ``(n2, -n1)``, i.e. the clockwise tangent.  In 3D
    ``T(n) @ v == n x v``.
    """
    n = _check_unit(n)
    nsd = n.shape[-1]
    if nsd == 2:
        return np.stack([n[..., 1], -n[..., 0]], axis=-1)[..., None]
    if nsd == 3:
        z = np.zeros(n.shape[:-1])
        n1, n2, n3 = n[..., 0], n[..., 1], n[..., 2]
        rows = [np.stack([z, -n3, n2], -1), np.stack([n3, z, -n1], -1), np.stack([-n2, n1, z], -1)]
        return np.stack(rows, axis=-2)
    raise ValueError(f"nsd must be 2 or 3, got {nsd}")


def curl_matrix(nsd: int) -> np.ndarray:
    """Stencil of ``R`` with shape (nsd, nrr, nsd): ``R v = sum_k C[k] dv/dx_k``."""
    if nsd == 2:
        C = np.zeros((2, 1, 2))
        C[0, 0, 1] = 1.0   # dv2/dx1
        C[1, 0, 0] = -1.0  # -dv1/dx2
        return C
    if nsd == 3:
        C = np.zeros((3, 3, 3))
        # row 1: -d/dx3 v2 + d/dx2 v3
        C[2, 0, 1], C[1, 0, 2] = -1.0, 1.0
        # row 2: d/dx3 v1 - d/dx1 v3
        C[2, 1, 0], C[0, 1, 2] = 1.0, -1.0
        # row 3: -d/dx2 v1 + d/dx1 v2
        C[1, 2, 0], C[0, 2, 1] = -1.0, 1.0
        return C
    raise ValueError(f"nsd must be 2 or 3, got {nsd}")


def voigt_strain(grad_u: np.ndarray) -> np.ndarray:
    """Apply ``grad_S`` to a displacement gradient ``grad_u[..., i, k] = du_i/dx_k``."""
    nsd = grad_u.shape[-1]
    return np.einsum("kai,...ik->...a", expansion_matrices(nsd), grad_u)


def voigt_curl(grad_u: np.ndarray) -> np.ndarray:
    """Apply ``R`` to a displacement gradient."""
    nsd = grad_u.shape[-1]
    return np.einsum("kri,...ik->...r", curl_matrix(nsd), grad_u)


def tensor_to_voigt(s: np.ndarray) -> np.ndarray:
    """Symmetric tensor (stress-like, no doubling) to Voigt vector."""
    nsd = s.shape[-1]
    if nsd == 2:
        return np.stack([s[..., 0, 0], s[..., 1, 1], s[..., 0, 1]], axis=-1)
    return np.stack([s[..., 0, 0], s[..., 1, 1], s[..., 2, 2],
                     s[..., 0, 1], s[..., 0, 2], s[..., 1, 2]], axis=-1)


def voigt_to_tensor(sV: np.ndarray) -> np.ndarray:
    nsd = 2 if sV.shape[-1] == 3 else 3
    s = np.empty(sV.shape[:-1] + (nsd, nsd))
    pairs = [(0, 0), (1, 1), (0, 1)] if nsd == 2 else \
        [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]
    for a, (i, j) in enumerate(pairs):
        s[..., i, j] = sV[..., a]
        s[..., j, i] = sV[..., a]
    return s


# --- integral identities on the unit square ---------------------------------

def _square_rules(order: int):
    x, w = np.polynomial.legendre.leggauss(order // 2 + 1)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    pts = np.stack([X1.ravel(), X2.ravel()], axis=-1)
    wts = np.outer(w, w).ravel()
    # each edge as (points, weights, outward normal)
    edges = []
    for fixed, val, normal in [(1, 0.0, (0.0, -1.0)), (0, 1.0, (1.0, 0.0)),
                               (1, 1.0, (0.0, 1.0)), (0, 0.0, (-1.0, 0.0))]:
        p = np.empty((x.size, 2))
        p[:, fixed] = val
        p[:, 1 - fixed] = x
        edges.append((p, w, np.array(normal)))
    return pts, wts, edges


def check_gauss_identity(stress: Callable, div_stress: Callable, v: Callable,
                         grad_v: Callable, order: int = 10) -> float:
    """Residual of the Voigt Gauss identity on the unit square.

    ``stress(x)`` returns Voigt vectors (..., 3), ``div_stress(x)`` returns
    ``grad_S^T s_V`` (..., 2), ``v`` and ``grad_v`` the vector field and its
    gradient.  Returns ``|boundary - volume terms|``.
    """
    pts, wts, edges = _square_rules(order)
    vol = (np.einsum("ga,ga->g", stress(pts), voigt_strain(grad_v(pts)))
           + np.einsum("gi,gi->g", div_stress(pts), v(pts))) @ wts
    bnd = 0.0
    for p, w, n in edges:
        traction = np.einsum("ai,ga->gi", normal_matrix(n), stress(p))
        bnd += np.einsum("gi,gi->g", traction, v(p)) @ w
    return float(abs(bnd - vol))


def check_stokes_identity(v: Callable, grad_v: Callable, order: int = 10) -> float:
    """Residual of the Voigt Stokes identity on the unit square.

    The boundary term is taken along the counter-clockwise tangent, which is
    ``-T(n)`` for the tangent matrix defined above.
    """
    pts, wts, edges = _square_rules(order)
    vol = voigt_curl(grad_v(pts)).T @ wts
    bnd = np.zeros(1)
    for p, w, n in edges:
        bnd -= (v(p) @ tangent_matrix(n)).T @ w
    return float(np.max(np.abs(vol - bnd)))
