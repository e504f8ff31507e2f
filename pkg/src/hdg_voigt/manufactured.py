"""Manufactured solutions on the unit square and L2 error norms."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .assembly import DEFAULT_TAU, ProblemData
from .fespace import lagrange_reference, map_elements
from .mesh import Mesh, all_dirichlet, neumann_on_bottom
from .voigt import (PLANE_STRAIN, MaterialParams, build_constitutive, expansion_matrices,
                    normal_matrix, voigt_strain)

SOLENOIDAL = "solenoidal"
AS_PRINTED = "as_printed"


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    """Exact displacement with hand-derived first and second derivatives.

    ``grad(x)[..., i, k] = du_i/dx_k`` and ``hess(x)[..., i, k, l] = d2u_i/dx_k dx_l``.
    """
    name: str
    material: MaterialParams
    u: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    is_neumann: Callable = all_dirichlet

    @property
    def const(self):
        return build_constitutive(self.material, 2)

    def strain(self, x):
        return voigt_strain(self.grad(x))

    def stress(self, x):
        return self.strain(x) @ self.const.D.T

    def mixed(self, x):
        """Exact ``L = -D^1/2 grad_S u``."""
        return -self.strain(x) @ self.const.Dhalf.T

    def body_force(self, x):
        H = self.hess(x)
        E = expansion_matrices(2)
        D = self.const.D
        f = np.zeros(np.shape(x))
        for k in range(2):
            dsig = voigt_strain(H[..., k]) @ D.T
            f -= dsig @ E[k]
        return f

    def neumann(self, x, n):
        return np.einsum("...ai,...a->...i", normal_matrix(n), self.stress(x))

    def problem_data(self, tau: float = DEFAULT_TAU) -> ProblemData:
        return ProblemData(self.body_force, self.u, self.neumann, self.material, tau)


def case_sinusoidal_2d(nu: float = 0.25, youngs_modulus: float = 1.0,
                       plane: str = PLANE_STRAIN) -> ManufacturedCase:
    """``u = (x2 sin(pi x1), x1^3 + cos(pi x2)) / 100`` with Neumann data on ``x2 = 0``."""
    pi = np.pi

    def u(x):
        x1, x2 = x[..., 0], x[..., 1]
        return 0.01 * np.stack([x2 * np.sin(pi * x1), x1**3 + np.cos(pi * x2)], axis=-1)

    def grad(x):
        x1, x2 = x[..., 0], x[..., 1]
        g = np.empty(x.shape[:-1] + (2, 2))
        g[..., 0, 0] = pi * x2 * np.cos(pi * x1)
        g[..., 0, 1] = np.sin(pi * x1)
        g[..., 1, 0] = 3.0 * x1**2
        g[..., 1, 1] = -pi * np.sin(pi * x2)
        return 0.01 * g

    def hess(x):
        x1, x2 = x[..., 0], x[..., 1]
        H = np.zeros(x.shape[:-1] + (2, 2, 2))
        H[..., 0, 0, 0] = -pi**2 * x2 * np.sin(pi * x1)
        H[..., 0, 0, 1] = H[..., 0, 1, 0] = pi * np.cos(pi * x1)
        H[..., 1, 0, 0] = 6.0 * x1
        H[..., 1, 1, 1] = -pi**2 * np.cos(pi * x2)
        return 0.01 * H

    return ManufacturedCase("sinusoidal2d", MaterialParams(youngs_modulus, nu, plane),
                            u, grad, hess, neumann_on_bottom)


def _p(t):
    return t**2 * (t - 1.0) ** 2, 2.0 * t * (t - 1.0) * (2.0 * t - 1.0), 12.0 * t**2 - 12.0 * t + 2.0


def _q(t):
    # q = p'/2
    return t * (t - 1.0) * (2.0 * t - 1.0), 6.0 * t**2 - 6.0 * t + 1.0, 12.0 * t - 6.0


def case_incompressible_2d(nu: float = 0.49999, youngs_modulus: float = 3.0,
                           plane: str = PLANE_STRAIN, variant: str = SOLENOIDAL) -> ManufacturedCase:
    """Clamped nearly-incompressible benchmark on the unit square.

    ``u1 = -x1^2 (x1-1)^2 x2 (x2-1)(2 x2-1)`` for both variants.  The default
    ``solenoidal`` variant takes ``u2 = x2^2 (x2-1)^2 x1 (x1-1)(2 x1-1)``, so
    ``div u = 0``; ``as_printed`` takes ``u2 = -u1``, which is not
    divergence free.
    """
    if variant not in (SOLENOIDAL, AS_PRINTED):
        raise ValueError(f"unknown variant {variant!r}")
    material = MaterialParams(youngs_modulus, nu, plane)

    def factors(x):
        x1, x2 = x[..., 0], x[..., 1]
        return _p(x1), _q(x1), _p(x2), _q(x2)

    def u(x):
        (p1, _, _), (q1, _, _), (p2, _, _), (q2, _, _) = factors(x)
        u1 = -p1 * q2
        u2 = p2 * q1 if variant == SOLENOIDAL else p1 * q2
        return np.stack([u1, u2], axis=-1)

    def grad(x):
        (p1, dp1, _), (q1, dq1, _), (p2, dp2, _), (q2, dq2, _) = factors(x)
        g = np.empty(x.shape[:-1] + (2, 2))
        g[..., 0, 0] = -dp1 * q2
        g[..., 0, 1] = -p1 * dq2
        if variant == SOLENOIDAL:
            g[..., 1, 0] = p2 * dq1
            g[..., 1, 1] = dp2 * q1
        else:
            g[..., 1, :] = -g[..., 0, :]
        return g

    def hess(x):
        (p1, dp1, ddp1), (q1, dq1, ddq1), (p2, dp2, ddp2), (q2, dq2, ddq2) = factors(x)
        H = np.empty(x.shape[:-1] + (2, 2, 2))
        H[..., 0, 0, 0] = -ddp1 * q2
        H[..., 0, 0, 1] = H[..., 0, 1, 0] = -dp1 * dq2
        H[..., 0, 1, 1] = -p1 * ddq2
        if variant == SOLENOIDAL:
            H[..., 1, 0, 0] = p2 * ddq1
            H[..., 1, 0, 1] = H[..., 1, 1, 0] = dp2 * dq1
            H[..., 1, 1, 1] = ddp2 * q1
        else:
            H[..., 1, :, :] = -H[..., 0, :, :]
        return H

    return ManufacturedCase("incompressible2d", material, u, grad, hess, all_dirichlet)


CASES = {"sinusoidal2d": case_sinusoidal_2d, "incompressible2d": case_incompressible_2d}


def l2_error(values: np.ndarray, exact: Callable, mesh: Mesh, degree: int,
             quad_order: int | None = None) -> float:
    """``sqrt(sum_e int |field - exact|^2)`` for an element-wise nodal field.

    ``values`` has shape (ne, n_en, ncomp) on the Lagrange element of the given
    degree; components are summed.
    """
    if quad_order is None:
        quad_order = 2 * degree + 6
    ref = lagrange_reference(mesh.elem_type, degree, quad_order)
    geo = map_elements(mesh.vertex_coords(), ref)
    uh = np.einsum("qj,ejc->eqc", ref.N, values)
    diff = uh - exact(geo.x)
    return float(np.sqrt(np.sum(np.einsum("eqc,eqc->eq", diff, diff) * geo.wdet)))
