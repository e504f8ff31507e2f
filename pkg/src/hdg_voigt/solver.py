"""Global trace system: numbering, sparse assembly, solve and field recovery."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import CondensedContribution, local_back_solve
from .mesh import DIRICHLET, FaceTopology
from .voigt import PLANE_STRESS, VoigtConstitutive


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class TraceDofMap:
    """Face-major, node-minor, component-innermost numbering of the trace unknowns."""
    offsets: np.ndarray   # (n_faces,) first global dof of each face, -1 on Dirichlet faces
    n_fn: int
    nsd: int
    ndof: int

    @classmethod
    def build(cls, topo: FaceTopology, n_fn: int, nsd: int = 2) -> "TraceDofMap":
        per_face = n_fn * nsd
        active = topo.tags != DIRICHLET
        offsets = np.full(topo.n_faces, -1, dtype=int)
        offsets[active] = np.arange(int(active.sum())) * per_face
        return cls(offsets, n_fn, nsd, int(active.sum()) * per_face)

    def element_dofs(self, topo: FaceTopology) -> np.ndarray:
        """Global dof of every element trace slot, shape (ne, nT); -1 on Dirichlet faces."""
        ne, nfa = topo.elem_faces.shape
        j = np.arange(self.n_fn)
        perm = np.where(topo.elem_face_flip[:, :, None], self.n_fn - 1 - j, j)   # (ne, nfa, nfn)
        base = self.offsets[topo.elem_faces][:, :, None, None]
        dofs = base + perm[:, :, :, None] * self.nsd + np.arange(self.nsd)
        dofs = np.where(base >= 0, dofs, -1)
        return dofs.reshape(ne, nfa * self.n_fn * self.nsd)


@dataclass(frozen=True, eq=False)
class GlobalTraceSystem:
    K: sp.csr_matrix
    f: np.ndarray

    @property
    def ndof(self) -> int:
        return self.f.size


def assemble_global(cond: CondensedContribution, dofmap: TraceDofMap, topo: FaceTopology,
                    element_order=None) -> GlobalTraceSystem:
    """Scatter the condensed element matrices into the sparse trace system.

    ``element_order`` only changes the order in which contributions are
    visited; the merge itself is always done in element order, so the result
    does not depend on it.
    """
    dofs = dofmap.element_dofs(topo)
    if dofs.size and dofs.max() >= dofmap.ndof:
        raise IndexError("trace dof index out of range")
    ne, nT = dofs.shape
    order = np.arange(ne) if element_order is None else np.asarray(element_order)
    if sorted(order.tolist()) != list(range(ne)):
        raise ValueError("element_order must be a permutation of the elements")
    order = np.sort(order)   # deterministic merge
    d = dofs[order]
    rows = np.broadcast_to(d[:, :, None], (ne, nT, nT))
    cols = np.broadcast_to(d[:, None, :], (ne, nT, nT))
    vals = cond.K[order]
    keep = (rows >= 0) & (cols >= 0)
    n = dofmap.ndof
    K = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n, n)).tocsr()
    K.sum_duplicates()
    fk = d >= 0
    f = np.bincount(d[fk], weights=cond.f[order][fk], minlength=n)
    return GlobalTraceSystem(K, f)


def solve_trace(system: GlobalTraceSystem, rtol: float = 1e-10, refine: int = 2) -> np.ndarray:
    """Sparse direct solve of ``K uhat = f`` with a backward-error check.

    The check uses the normwise backward error
    ``|K x - f| / (|K| |x| + |f|)`` (infinity norms), which stays meaningful
    when the system is badly conditioned, e.g. for nu close to 1/2.  A couple
    of iterative-refinement steps reuse the factorisation.
    """
    if system.ndof == 0:
        return np.zeros(0)
    if not np.any(system.f):
        return np.zeros(system.ndof)
    K = system.K.tocsc()
    try:
        lu = spla.splu(K, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SolverError(
            f"trace system ({system.ndof} dofs) is singular; a non-empty Dirichlet boundary "
            "and tau > 0 are required") from exc
    uhat = lu.solve(system.f)
    for _ in range(refine):
        uhat = uhat + lu.solve(system.f - K @ uhat)
    err = backward_error(K, uhat, system.f)
    if not np.isfinite(err) or err > rtol:
        raise SolverError(f"trace solve backward error {err:.3e} exceeds {rtol:.1e} ({system.ndof} dofs)")
    return uhat


def backward_error(K, x: np.ndarray, f: np.ndarray) -> float:
    r = np.abs(K @ x - f).max()
    knorm = abs(K).sum(axis=1).max()
    return float(r / (knorm * np.abs(x).max() + np.abs(f).max()))


@dataclass(frozen=True, eq=False)
class SolutionFields:
    u: np.ndarray        # (ne, nen, nsd)
    L: np.ndarray        # (ne, nen, msd)
    sigma: np.ndarray    # (ne, nen, msd) Voigt stress, -D^1/2 L
    uhat: np.ndarray     # (ndof,)
    uhat_e: np.ndarray   # (ne, nT) gathered element traces (zero on Dirichlet faces)


def gather_traces(uhat: np.ndarray, dofmap: TraceDofMap, topo: FaceTopology) -> np.ndarray:
    dofs = dofmap.element_dofs(topo)
    return np.where(dofs >= 0, uhat[np.maximum(dofs, 0)] if uhat.size else 0.0, 0.0)


def recover_fields(cond: CondensedContribution, uhat: np.ndarray, dofmap: TraceDofMap,
                   topo: FaceTopology, const: VoigtConstitutive) -> SolutionFields:
    uhat_e = gather_traces(uhat, dofmap, topo)
    L, u = local_back_solve(cond, uhat_e)
    sigma = -np.einsum("ab,enb->ena", const.Dhalf, L)
    return SolutionFields(u, L, sigma, uhat, uhat_e)


def compute_von_mises(sigma_v: np.ndarray, nu: float = 0.0, plane: str = "plane_strain") -> np.ndarray:
    """Von Mises stress of 2D Voigt stresses ``(s11, s22, s12)``.

    Plane strain uses ``s33 = nu (s11 + s22)``; plane stress ``s33 = 0``.
    """
    s = np.asarray(sigma_v, dtype=float)
    s11, s22, s12 = s[..., 0], s[..., 1], s[..., 2]
    s33 = 0.0 if plane == PLANE_STRESS else nu * (s11 + s22)
    j2 = 0.5 * ((s11 - s22) ** 2 + (s22 - s33) ** 2 + (s33 - s11) ** 2) + 3.0 * s12**2
    return np.sqrt(np.maximum(j2, 0.0))


@dataclass(frozen=True, eq=False)
class HDGSolution:
    mesh: object
    topo: FaceTopology
    degree: int
    const: VoigtConstitutive
    cond: CondensedContribution
    dofmap: TraceDofMap
    system: GlobalTraceSystem
    fields: SolutionFields


def solve_hdg(mesh, topo: FaceTopology, degree: int, data) -> HDGSolution:
    """Assemble, condense, solve the trace system and recover the element fields."""
    from .assembly import assemble_local, condense
    from .fespace import lagrange_reference, map_elements
    from .voigt import build_constitutive

    const = build_constitutive(data.material, 2)
    ref = lagrange_reference(mesh.elem_type, degree)
    geo = map_elements(mesh.vertex_coords(), ref)
    cond = condense(assemble_local(geo, topo.elem_face_tags(), const, data))
    dofmap = TraceDofMap.build(topo, ref.face.n_fn, 2)
    system = assemble_global(cond, dofmap, topo)
    uhat = solve_trace(system)
    return HDGSolution(mesh, topo, degree, const, cond, dofmap, system,
                       recover_fields(cond, uhat, dofmap, topo, const))
