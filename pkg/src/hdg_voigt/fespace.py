"""Reference elements, nodal Lagrange bases, quadrature and element mappings.

Reference domains: the unit triangle ``{(0,0), (1,0), (0,1)}``, the unit
square ``[0,1]^2`` and the unit segment ``[0,1]`` for faces.  Nodes are
equispaced and ordered vertices first, then edge nodes face by face (in the
face's local direction), then interior nodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .mesh import QUAD, TRI

MAX_DEGREE = 4

_VERTICES = {
    TRI: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    QUAD: np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
}


class UnsupportedElementError(ValueError):
    pass


class InvertedElementError(ValueError):
    pass


# --- quadrature -------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (nq, dim)
    weights: np.ndarray  # (nq,)
    order: int


@lru_cache(maxsize=None)
def quadrature(shape: str, order: int) -> QuadratureRule:
    """Rule exact for polynomials of total degree ``order`` (tensor degree on the square).

    ``shape`` is ``"segment"``, ``"quad"`` or ``"tri"``.  The triangle rule is
    a collapsed Gauss-Jacobi product rule.
    """
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    n = order // 2 + 1
    x, w = np.polynomial.legendre.leggauss(n)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    if shape == "segment":
        return QuadratureRule(x[:, None], w, order)
    if shape == QUAD:
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        return QuadratureRule(np.stack([X1.ravel(), X2.ravel()], -1), np.outer(w, w).ravel(), order)
    if shape == TRI:
        t, wj = roots_jacobi(n, 1.0, 0.0)
        y, wy = 0.5 * (t + 1.0), 0.25 * wj
        X, Y = np.meshgrid(x, y, indexing="ij")
        pts = np.stack([(X * (1.0 - Y)).ravel(), Y.ravel()], -1)
        return QuadratureRule(pts, np.outer(w, wy).ravel(), order)
    raise UnsupportedElementError(f"no quadrature for shape {shape!r}")


# --- nodal bases --------------------------------------------------------------

def _node_layout(elem_type: str, k: int):
    V = _VERTICES[elem_type]
    nv = len(V)
    nodes = [v for v in V]
    edge_nodes = []
    for f in range(nv):
        a, b = V[f], V[(f + 1) % nv]
        ids = []
        for j in range(1, k):
            ids.append(len(nodes))
            nodes.append(a + (b - a) * j / k)
        edge_nodes.append(ids)
    if elem_type == TRI:
        interior = [(i, j) for j in range(1, k) for i in range(1, k - j)]
    else:
        interior = [(i, j) for j in range(1, k) for i in range(1, k)]
    nodes += [np.array([i / k, j / k]) for i, j in interior]
    face_nodes = np.array([[f] + edge_nodes[f] + [(f + 1) % nv] for f in range(nv)], dtype=int)
    return np.array(nodes), face_nodes


def _silvester(t: np.ndarray, n: int, k: int):
    """``prod_{m<n} (k t - m) / (m + 1)`` and its derivative in ``t``."""
    val = np.ones_like(t)
    der = np.zeros_like(t)
    for m in range(n):
        fac = (k * t - m) / (m + 1)
        der = der * fac + val * (k / (m + 1))
        val = val * fac
    return val, der


def _lagrange_1d(t: np.ndarray, i: int, k: int):
    """Equispaced 1D Lagrange polynomial ``l_i`` on ``{0, 1/k, .., 1}`` and its derivative."""
    val = np.ones_like(t)
    der = np.zeros_like(t)
    for m in range(k + 1):
        if m == i:
            continue
        fac = (k * t - m) / (i - m)
        der = der * fac + val * (k / (i - m))
        val = val * fac
    return val, der


def _basis(elem_type: str, k: int, lattice: np.ndarray, pts: np.ndarray):
    """Nodal basis values (np, n_en) and reference gradients (np, n_en, 2)."""
    x, y = pts[:, 0], pts[:, 1]
    n_en = lattice.shape[0]
    val = np.empty((pts.shape[0], n_en))
    grad = np.empty((pts.shape[0], n_en, 2))
    if elem_type == TRI:
        lam = (1.0 - x - y, x, y)
        for j, idx in enumerate(lattice):
            (v0, d0), (v1, d1), (v2, d2) = (_silvester(l, n, k) for l, n in zip(lam, idx))
            val[:, j] = v0 * v1 * v2
            grad[:, j, 0] = -d0 * v1 * v2 + v0 * d1 * v2
            grad[:, j, 1] = -d0 * v1 * v2 + v0 * v1 * d2
    else:
        for j, (i1, i2) in enumerate(lattice):
            v1, d1 = _lagrange_1d(x, i1, k)
            v2, d2 = _lagrange_1d(y, i2, k)
            val[:, j] = v1 * v2
            grad[:, j, 0] = d1 * v2
            grad[:, j, 1] = v1 * d2
    return val, grad


@dataclass(frozen=True, eq=False)
class ReferenceFace:
    degree: int
    nodes: np.ndarray       # (n_fn,) equispaced in [0, 1]
    quad: QuadratureRule
    N: np.ndarray           # (nqf, n_fn)

    @property
    def n_fn(self) -> int:
        return self.nodes.size

    def eval(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.ones((s.size, self.n_fn))
        for j, sj in enumerate(self.nodes):
            for m, sm in enumerate(self.nodes):
                if m != j:
                    out[:, j] *= (s - sm) / (sj - sm)
        return out


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    elem_type: str
    degree: int
    nodes: np.ndarray        # (n_en, 2)
    face_nodes: np.ndarray   # (nfa, n_fn) element node ids along each local face
    lattice: np.ndarray      # integer node indices (barycentric on triangles)
    quad: QuadratureRule
    N: np.ndarray            # (nq, n_en)
    dN: np.ndarray           # (nq, n_en, 2)
    face: ReferenceFace
    face_points: np.ndarray  # (nfa, nqf, 2) reference coordinates of face quadrature points
    Nf: np.ndarray           # (nfa, nqf, n_en)

    @property
    def n_en(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_fa(self) -> int:
        return self.face_nodes.shape[0]

    @property
    def vertices(self) -> np.ndarray:
        return _VERTICES[self.elem_type]

    def eval(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return _basis(self.elem_type, self.degree, self.lattice, pts)[0]

    def eval_grad(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return _basis(self.elem_type, self.degree, self.lattice, pts)[1]

    def face_param_to_ref(self, f: int, s) -> np.ndarray:
        V = self.vertices
        a, b = V[f], V[(f + 1) % len(V)]
        s = np.asarray(s, dtype=float)
        return a + s[..., None] * (b - a)


@lru_cache(maxsize=None)
def lagrange_reference(elem_type: str, k: int, quad_order: int | None = None) -> ReferenceElement:
    """Equispaced Lagrange element of degree ``k`` (complete P_k on triangles, Q_k on quads)."""
    if elem_type not in _VERTICES:
        raise UnsupportedElementError(f"unsupported element type {elem_type!r}")
    if not 1 <= k <= MAX_DEGREE:
        raise UnsupportedElementError(f"degree must be in 1..{MAX_DEGREE}, got {k}")
    if quad_order is None:
        quad_order = 2 * (k + 1) + 1
    nodes, face_nodes = _node_layout(elem_type, k)
    if elem_type == TRI:
        ij = np.rint(nodes * k).astype(int)
        lattice = np.column_stack([k - ij.sum(axis=1), ij])
    else:
        lattice = np.rint(nodes * k).astype(int)
    rule = quadrature(elem_type, quad_order)
    frule = quadrature("segment", quad_order)
    s = frule.points[:, 0]
    fnodes = np.linspace(0.0, 1.0, k + 1)
    face = ReferenceFace(k, fnodes, frule, np.empty(0))
    face = ReferenceFace(k, fnodes, frule, face.eval(s))

    V = _VERTICES[elem_type]
    fpts = np.stack([V[f] + s[:, None] * (V[(f + 1) % len(V)] - V[f]) for f in range(len(V))])
    return ReferenceElement(
        elem_type, k, nodes, face_nodes, lattice, rule,
        *_basis(elem_type, k, lattice, rule.points),
        face=face, face_points=fpts,
        Nf=np.stack([_basis(elem_type, k, lattice, p)[0] for p in fpts]))


# --- mapping ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MappedElements:
    """Geometric data for a batch of elements sharing one reference element.

    Volume arrays are indexed ``[element, quad point, ...]``; face arrays
    ``[element, local face, face quad point, ...]``.
    """
    ref: ReferenceElement
    x: np.ndarray         # (ne, nq, 2)
    J: np.ndarray         # (ne, nq, 2, 2) dx_i / dxi_j
    detJ: np.ndarray      # (ne, nq)
    dN: np.ndarray        # (ne, nq, n_en, 2) physical gradients
    xf: np.ndarray        # (ne, nfa, nqf, 2)
    jf: np.ndarray        # (ne, nfa, nqf) surface Jacobian
    normals: np.ndarray   # (ne, nfa, nqf, 2) outward unit normals

    @property
    def n_elements(self) -> int:
        return self.x.shape[0]

    @property
    def wdet(self) -> np.ndarray:
        """``|J| w`` at volume quadrature points."""
        return self.detJ * self.ref.quad.weights

    @property
    def wface(self) -> np.ndarray:
        """``|J_f| w`` at face quadrature points."""
        return self.jf * self.ref.face.quad.weights


def _geometry_basis(elem_type: str, pts: np.ndarray):
    g = lagrange_reference(elem_type, 1, 1)
    return g.eval(pts), g.eval_grad(pts)


def map_elements(vertex_coords, ref: ReferenceElement) -> MappedElements:
    """Map straight-sided elements given their counter-clockwise vertices.

    ``vertex_coords`` has shape (nv, 2) or (ne, nv, 2).
    """
    X = np.asarray(vertex_coords, dtype=float)
    if X.ndim == 2:
        X = X[None]
    Ng, dNg = _geometry_basis(ref.elem_type, ref.quad.points)
    x = np.einsum("qv,evd->eqd", Ng, X)
    J = np.einsum("qvj,evi->eqij", dNg, X)
    detJ = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    if np.any(detJ <= 0):
        bad = np.unique(np.nonzero(detJ <= 0)[0])
        raise InvertedElementError(f"non-positive Jacobian in element(s) {bad.tolist()}")
    Jinv = np.linalg.inv(J)
    dN = np.einsum("qjl,eqli->eqji", ref.dN, Jinv)

    nfa = ref.n_fa
    fp = ref.face_points.reshape(-1, 2)
    Ngf, dNgf = _geometry_basis(ref.elem_type, fp)
    nqf = ref.face_points.shape[1]
    xf = np.einsum("qv,evd->eqd", Ngf, X).reshape(X.shape[0], nfa, nqf, 2)
    Jf = np.einsum("qvj,evi->eqij", dNgf, X).reshape(X.shape[0], nfa, nqf, 2, 2)
    V = ref.vertices
    dxi = np.array([V[(f + 1) % nfa] - V[f] for f in range(nfa)])   # (nfa, 2)
    tang = np.einsum("efqij,fj->efqi", Jf, dxi)
    jf = np.linalg.norm(tang, axis=-1)
    normals = np.stack([tang[..., 1], -tang[..., 0]], axis=-1) / jf[..., None]
    return MappedElements(ref, x, J, detJ, dN, xf, jf, normals)


def map_element(nodes, ref: ReferenceElement) -> MappedElements:
    """Single-element convenience wrapper around :func:`map_elements`."""
    return map_elements(np.asarray(nodes, dtype=float)[None], ref)
