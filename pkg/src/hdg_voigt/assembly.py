"""Element matrices of the HDG local problem and their static condensation.

All routines work on a batch of elements at once (leading axis ``e``).  Local
unknown ordering is node-major, component-minor::

    L_e: index i * msd + a        u_e: index i * nsd + b

Element trace unknowns are ordered face, face node (element-local face
direction), component: ``(f * n_fn + j) * nsd + c``.  Dirichlet faces keep
their slots but their coupling blocks are zero, so they drop out of the
condensed system.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fespace import MappedElements
from .mesh import DIRICHLET, INTERIOR, NEUMANN
from .voigt import MaterialParams, VoigtConstitutive, expansion_matrices

DEFAULT_TAU = 3.0


class StabilisationError(np.linalg.LinAlgError):
    """The local (L, u) block could not be factorised."""


@dataclass(frozen=True)
class ProblemData:
    body_force: Callable[[np.ndarray], np.ndarray]
    dirichlet: Callable[[np.ndarray], np.ndarray]
    neumann: Callable[[np.ndarray, np.ndarray], np.ndarray]   # g(x, n)
    material: MaterialParams
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"stabilisation parameter must be positive, got {self.tau}")


def zero_field(x, *_):
    return np.zeros(np.shape(x))


@dataclass(frozen=True, eq=False)
class LocalSystem:
    A_LL: np.ndarray     # (ne, msd*nen, msd*nen)
    A_Lu: np.ndarray     # (ne, msd*nen, nsd*nen)
    A_uu: np.ndarray     # (ne, nsd*nen, nsd*nen)
    A_Lh: np.ndarray     # (ne, msd*nen, nT)
    A_uh: np.ndarray     # (ne, nsd*nen, nT)
    A_hh: np.ndarray     # (ne, nT, nT)
    f_L: np.ndarray
    f_u: np.ndarray
    f_h: np.ndarray
    face_tags: np.ndarray  # (ne, nfa)
    nsd: int
    msd: int
    n_en: int
    n_fn: int

    @property
    def active_faces(self) -> np.ndarray:
        """Faces that carry trace unknowns (everything but Dirichlet)."""
        return self.face_tags != DIRICHLET

    @property
    def block(self) -> np.ndarray:
        """The symmetric (L, u) block matrix."""
        top = np.concatenate([self.A_LL, self.A_Lu], axis=2)
        bot = np.concatenate([np.swapaxes(self.A_Lu, 1, 2), self.A_uu], axis=2)
        return np.concatenate([top, bot], axis=1)

    @property
    def coupling(self) -> np.ndarray:
        return np.concatenate([self.A_Lh, self.A_uh], axis=1)

    @property
    def rhs(self) -> np.ndarray:
        return np.concatenate([self.f_L, self.f_u], axis=1)


def _kron_eye(M: np.ndarray, n: int) -> np.ndarray:
    """``M[..., i, j] -> M[..., i, j] * I_n`` laid out node-major."""
    out = np.einsum("...ij,ab->...iajb", M, np.eye(n))
    s = out.shape
    return out.reshape(s[:-4] + (s[-4] * n, s[-2] * n))


def assemble_local(geo: MappedElements, face_tags: np.ndarray, const: VoigtConstitutive,
                   data: ProblemData) -> LocalSystem:
    """Quadrature of every local block and load vector for a batch of elements."""
    ref = geo.ref
    face_tags = np.asarray(face_tags)
    if face_tags.shape != (geo.n_elements, ref.n_fa):
        raise ValueError("face_tags must have shape (n_elements, n_faces)")
    if not np.all(np.isin(face_tags, (INTERIOR, DIRICHLET, NEUMANN))):
        raise ValueError(f"unknown face tag in {np.unique(face_tags)}")
    nsd, msd, tau = const.nsd, const.msd, data.tau
    ne, nen, nfa = geo.n_elements, ref.n_en, ref.n_fa
    Nh = ref.face.N                    # (nqf, nfn)
    nfn = Nh.shape[1]
    DE = np.einsum("ab,kbc->kac", const.Dhalf, expansion_matrices(nsd))   # D^1/2 E_k

    w = geo.wdet
    N = ref.N
    M = np.einsum("qi,qj,eq->eij", N, N, w)
    A_LL = -_kron_eye(M, msd)
    G = np.einsum("eqik,qj,eq->ekij", geo.dN, N, w)
    A_Lu = np.einsum("ekij,kab->eiajb", G, DE).reshape(ne, nen * msd, nen * nsd)

    wf = geo.wface
    Nf = ref.Nf                        # (nfa, nqf, nen)
    dirichlet = (face_tags == DIRICHLET).astype(float)
    neumann = (face_tags == NEUMANN).astype(float)
    active = 1.0 - dirichlet

    A_uu = tau * _kron_eye(np.einsum("fqi,fqj,efq->eij", Nf, Nf, wf), nsd)

    P = np.einsum("fqi,qj,efq->efij", Nf, Nh, wf) * active[:, :, None, None]
    A_uh = tau * np.einsum("efij,bc->eibfjc", P, np.eye(nsd)).reshape(ne, nen * nsd, nfa * nfn * nsd)
    Q = np.einsum("fqi,qj,efqk,efq->efkij", Nf, Nh, geo.normals, wf) * active[:, :, None, None, None]
    A_Lh = np.einsum("efkij,kac->eiafjc", Q, DE).reshape(ne, nen * msd, nfa * nfn * nsd)
    Mh = np.einsum("qi,qj,efq->efij", Nh, Nh, wf) * active[:, :, None, None]
    A_hh = np.zeros((ne, nfa, nfn, nsd, nfa, nfn, nsd))
    for f in range(nfa):
        A_hh[:, f, :, :, f, :, :] = -tau * np.einsum("eij,bc->eibjc", Mh[:, f], np.eye(nsd))
    A_hh = A_hh.reshape(ne, nfa * nfn * nsd, nfa * nfn * nsd)

    body = data.body_force(geo.x)                            # (ne, nq, nsd)
    f_u = np.einsum("qi,eqb,eq->eib", N, body, w).reshape(ne, nen * nsd)
    f_L = np.zeros((ne, nen * msd))
    f_h = np.zeros((ne, nfa, nfn, nsd))
    if dirichlet.any():
        uD = data.dirichlet(geo.xf)                          # (ne, nfa, nqf, nsd)
        wD = wf * dirichlet[:, :, None]
        f_L = np.einsum("fqi,efqk,kab,efqb,efq->eia", Nf, geo.normals, DE, uD, wD).reshape(ne, -1)
        f_u = f_u + tau * np.einsum("fqi,efqb,efq->eib", Nf, uD, wD).reshape(ne, -1)
    if neumann.any():
        g = data.neumann(geo.xf, geo.normals)
        f_h = -np.einsum("qj,efqb,efq->efjb", Nh, g, wf * neumann[:, :, None])
    return LocalSystem(A_LL, A_Lu, A_uu, A_Lh, A_uh, A_hh, f_L, f_u, f_h.reshape(ne, -1),
                       face_tags, nsd, msd, nen, nfn)


@dataclass(frozen=True, eq=False)
class CondensedContribution:
    """Per-element trace matrices plus the local solves kept for back-substitution."""
    K: np.ndarray          # (ne, nT, nT)
    f: np.ndarray          # (ne, nT)
    AinvB: np.ndarray      # (ne, m, nT)
    Ainvf: np.ndarray      # (ne, m)
    local: LocalSystem

    def trace_mask(self) -> np.ndarray:
        """Boolean (ne, nT) mask of element trace slots that own global unknowns."""
        loc = self.local
        return np.repeat(loc.active_faces, loc.n_fn * loc.nsd, axis=1)

    def element(self, e: int) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``(K_e, f_e)`` restricted to the element's non-Dirichlet faces."""
        m = self.trace_mask()[e]
        return self.K[e][np.ix_(m, m)], self.f[e][m]


def condense(local: LocalSystem) -> CondensedContribution:
    A = local.block
    B = local.coupling
    F = local.rhs
    try:
        X = np.linalg.solve(A, np.concatenate([B, F[:, :, None]], axis=2))
    except np.linalg.LinAlgError as exc:
        raise StabilisationError(
            "singular local block; check that tau > 0 and the element is not degenerate") from exc
    AinvB, Ainvf = X[:, :, :-1], X[:, :, -1]
    Bt = np.swapaxes(B, 1, 2)
    K = Bt @ AinvB + local.A_hh
    f = local.f_h - np.einsum("etm,em->et", Bt, Ainvf)
    return CondensedContribution(K, f, AinvB, Ainvf, local)


def local_back_solve(cond: CondensedContribution, uhat_e: np.ndarray):
    """Recover nodal ``(L_e, u_e)`` from the element trace values.

    ``uhat_e`` has shape (ne, nT); entries on Dirichlet faces are ignored.
    Returns arrays of shape (ne, n_en, msd) and (ne, n_en, nsd).
    """
    loc = cond.local
    uhat_e = np.where(cond.trace_mask(), uhat_e, 0.0)
    X = cond.Ainvf + np.einsum("emt,et->em", cond.AinvB, uhat_e)
    nL = loc.n_en * loc.msd
    L = X[:, :nL].reshape(-1, loc.n_en, loc.msd)
    u = X[:, nL:].reshape(-1, loc.n_en, loc.nsd)
    return L, u
