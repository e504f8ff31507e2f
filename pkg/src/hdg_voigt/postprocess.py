"""Element-by-element super-convergent displacement ``u*`` of degree k+1.

On each element ``u*`` solves the pure-traction problem

    int grad_S v . D^1/2 grad_S u*  =  -int grad_S v . L_h

whose kernel is the rigid motions.  It is closed with the mean constraint
``int u* = int u_h`` plus one rotational constraint, selected by
:class:`RotationalConstraint`, through a bordered (Lagrange multiplier)
system.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fespace import MappedElements, lagrange_reference, map_elements
from .mesh import DIRICHLET, Mesh
from .voigt import VoigtConstitutive, expansion_matrices


class RotationalConstraint(str, enum.Enum):
    BARYCENTRE_MOMENT = "barycentre_moment"      # opt1
    MEAN_CURL = "mean_curl_of_uh"                # opt2
    BOUNDARY_TRACE_CURL = "boundary_trace_curl"  # opt3

    @classmethod
    def parse(cls, value) -> "RotationalConstraint":
        aliases = {"opt1": cls.BARYCENTRE_MOMENT, "opt2": cls.MEAN_CURL,
                   "opt3": cls.BOUNDARY_TRACE_CURL}
        if isinstance(value, cls):
            return value
        return aliases.get(str(value).lower()) or cls(value)

    @property
    def short(self) -> str:
        return {"barycentre_moment": "opt1", "mean_curl_of_uh": "opt2",
                "boundary_trace_curl": "opt3"}[self.value]


class DegenerateElementError(np.linalg.LinAlgError):
    pass


class MissingTraceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StarLocalProblem:
    geo: MappedElements      # degree k+1 element geometry
    K: np.ndarray            # (ne, nsd*nen*, nsd*nen*)
    load: np.ndarray         # (ne, nsd*nen*)
    C: np.ndarray            # (ne, nsd + nrr, nsd*nen*)
    c: np.ndarray            # (ne, nsd + nrr)
    barycentre: np.ndarray   # (ne, 2)
    constraint: RotationalConstraint


def _strain_operator(dN: np.ndarray) -> np.ndarray:
    """``B[e, q, a, j*nsd + b] = sum_k E_k[a, b] dN_j/dx_k``."""
    E = expansion_matrices(2)
    B = np.einsum("kab,eqjk->eqajb", E, dN)
    s = B.shape
    return B.reshape(s[0], s[1], s[2], s[3] * s[4])


def assemble_star(mesh: Mesh, degree: int, const: VoigtConstitutive, L: np.ndarray,
                  u: np.ndarray, constraint, uhat_e: np.ndarray | None = None,
                  face_tags: np.ndarray | None = None,
                  dirichlet: Callable | None = None) -> StarLocalProblem:
    """Build the bordered local problems for every element.

    ``L`` and ``u`` are nodal HDG fields of degree ``degree``.  The boundary
    option needs the gathered element traces ``uhat_e`` (element-local face
    ordering), the element face tags and the Dirichlet datum, which replaces
    the trace on Dirichlet faces.
    """
    constraint = RotationalConstraint.parse(constraint)
    k = degree
    ref_s = lagrange_reference(mesh.elem_type, k + 1, 2 * (k + 2) + 1)
    ref_k = lagrange_reference(mesh.elem_type, k)
    geo = map_elements(mesh.vertex_coords(), ref_s)
    pts = ref_s.quad.points
    w = geo.wdet
    ne, nen_s = geo.n_elements, ref_s.n_en

    Nk = ref_k.eval(pts)
    Lq = np.einsum("qj,eja->eqa", Nk, L)
    uq = np.einsum("qj,ejb->eqb", Nk, u)

    B = _strain_operator(geo.dN)
    K = np.einsum("eqam,ab,eqbn,eq->emn", B, const.Dhalf, B, w)
    load = -np.einsum("eqam,eqa,eq->em", B, Lq, w)

    area = w.sum(axis=1)
    xb = np.einsum("eqd,eq->ed", geo.x, w) / area[:, None]
    Ns = ref_s.N
    C = np.zeros((ne, 3, nen_s, 2))
    c = np.zeros((ne, 3))
    intN = np.einsum("qj,eq->ej", Ns, w)
    C[:, 0, :, 0] = intN
    C[:, 1, :, 1] = intN
    c[:, :2] = np.einsum("eqb,eq->eb", uq, w)

    if constraint is RotationalConstraint.BARYCENTRE_MOMENT:
        r = geo.x - xb[:, None, :]
        C[:, 2, :, 0] = -np.einsum("eq,qj,eq->ej", r[..., 1], Ns, w)
        C[:, 2, :, 1] = np.einsum("eq,qj,eq->ej", r[..., 0], Ns, w)
        c[:, 2] = np.einsum("eq,eq->e", r[..., 0] * uq[..., 1] - r[..., 1] * uq[..., 0], w)
    else:
        C[:, 2, :, 0] = -np.einsum("eqj,eq->ej", geo.dN[..., 1], w)
        C[:, 2, :, 1] = np.einsum("eqj,eq->ej", geo.dN[..., 0], w)
        if constraint is RotationalConstraint.MEAN_CURL:
            dNk = np.einsum("qjl,eqli->eqji", ref_k.eval_grad(pts), np.linalg.inv(geo.J))
            curl = (np.einsum("eqj,ej->eq", dNk[..., 0], u[..., 1])
                    - np.einsum("eqj,ej->eq", dNk[..., 1], u[..., 0]))
            c[:, 2] = np.einsum("eq,eq->e", curl, w)
        else:
            c[:, 2] = _boundary_circulation(geo, ref_k, uhat_e, face_tags, dirichlet)

    return StarLocalProblem(geo, K, load, C.reshape(ne, 3, nen_s * 2), c, xb, constraint)


def _boundary_circulation(geo, ref_k, uhat_e, face_tags, dirichlet) -> np.ndarray:
    """``sum_f int_f uhat . t`` with ``t = (-n2, n1)`` the counter-clockwise tangent."""
    if uhat_e is None or face_tags is None:
        raise MissingTraceError("the boundary-trace constraint needs the hybrid variable on every face")
    ne, nfa = face_tags.shape
    s = geo.ref.face.quad.points[:, 0]
    Nh = ref_k.face.eval(s)                              # (nqf, nfn)
    uh = uhat_e.reshape(ne, nfa, Nh.shape[1], 2)
    trace = np.einsum("qj,efjb->efqb", Nh, uh)
    is_d = face_tags == DIRICHLET
    if is_d.any():
        if dirichlet is None:
            raise MissingTraceError("Dirichlet datum required on Dirichlet faces")
        trace = np.where(is_d[:, :, None, None], dirichlet(geo.xf), trace)
    n = geo.normals
    t = np.stack([-n[..., 1], n[..., 0]], axis=-1)
    return np.einsum("efqb,efqb,efq->e", trace, t, geo.wface)


def solve_star(problem: StarLocalProblem) -> np.ndarray:
    """Solve the bordered systems; returns nodal ``u*`` of shape (ne, nen*, 2)."""
    K, C = problem.K, problem.C
    ne, m = problem.load.shape
    nc = C.shape[1]
    S = np.zeros((ne, m + nc, m + nc))
    S[:, :m, :m] = K
    S[:, :m, m:] = np.swapaxes(C, 1, 2)
    S[:, m:, :m] = C
    rhs = np.concatenate([problem.load, problem.c], axis=1)
    try:
        x = np.linalg.solve(S, rhs[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError as exc:
        raise DegenerateElementError("singular post-process system on a degenerate element") from exc
    return x[:, :m].reshape(ne, -1, 2)


def constraint_residuals(problem: StarLocalProblem, ustar: np.ndarray) -> np.ndarray:
    """Relative residual of each constraint row, shape (ne, 3)."""
    x = ustar.reshape(ustar.shape[0], -1)
    lhs = np.einsum("ecm,em->ec", problem.C, x)
    scale = np.maximum(np.abs(problem.c), np.abs(problem.C).sum(axis=2) * np.abs(x).max(axis=1)[:, None])
    scale = np.maximum(scale, np.finfo(float).tiny)
    return np.abs(lhs - problem.c) / scale


def postprocess(mesh: Mesh, degree: int, const: VoigtConstitutive, L, u, constraint,
                uhat_e=None, face_tags=None, dirichlet=None):
    """Assemble and solve in one go; returns ``(ustar, problem)``."""
    prob = assemble_star(mesh, degree, const, L, u, constraint, uhat_e, face_tags, dirichlet)
    return solve_star(prob), prob
