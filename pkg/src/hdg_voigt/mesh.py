"""Structured 2D meshes of axis-aligned boxes and their face topology.

Vertices of every element are stored counter-clockwise.  Local face ``f``
joins local vertices ``f`` and ``(f + 1) % nv``.  A face's global orientation
runs from its lower to its higher global vertex index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

QUAD = "quad"
TRI = "tri"

ALTERNATING = "alternating"
SINGLE_DIAGONAL = "single_diagonal"

INTERIOR, DIRICHLET, NEUMANN = 0, 1, 2
TAG_NAMES = {INTERIOR: "interior", DIRICHLET: "dirichlet", NEUMANN: "neumann"}


class MeshError(ValueError):
    pass


class TopologyError(MeshError):
    pass


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray        # (n_nodes, 2)
    elements: np.ndarray     # (n_el, nv) vertex indices, counter-clockwise
    elem_type: str
    h: float

    def __post_init__(self):
        nv = {QUAD: 4, TRI: 3}.get(self.elem_type)
        if nv is None:
            raise MeshError(f"unknown element type {self.elem_type!r}")
        if self.elements.ndim != 2 or self.elements.shape[1] != nv:
            raise MeshError(f"{self.elem_type} connectivity must have {nv} columns")
        if self.elements.size and (self.elements.min() < 0 or self.elements.max() >= len(self.nodes)):
            raise MeshError("element connectivity refers to missing nodes")

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def nsd(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_local_faces(self) -> int:
        return self.elements.shape[1]

    def vertex_coords(self) -> np.ndarray:
        """Element vertex coordinates, shape (n_el, nv, 2)."""
        return self.nodes[self.elements]

    def areas(self) -> np.ndarray:
        X = self.vertex_coords()
        x, y = X[..., 0], X[..., 1]
        return 0.5 * np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)


def _grid(n: int, domain) -> tuple[np.ndarray, float]:
    if n < 1:
        raise MeshError(f"number of subdivisions must be >= 1, got {n}")
    (x0, x1), (y0, y1) = domain
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.stack([X.ravel(), Y.ravel()], axis=-1)
    h = max(x1 - x0, y1 - y0) / n
    return nodes, h


def structured_quad_mesh(n: int, domain=((0.0, 1.0), (0.0, 1.0))) -> Mesh:
    nodes, h = _grid(n, domain)
    j, i = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    v0 = (j * (n + 1) + i).ravel()
    elements = np.stack([v0, v0 + 1, v0 + n + 2, v0 + n + 1], axis=-1)
    return Mesh(nodes, elements, QUAD, h)


def structured_tri_mesh(n: int, pattern: str = ALTERNATING,
                        domain=((0.0, 1.0), (0.0, 1.0))) -> Mesh:
    """Split each grid cell into two triangles.

    ``single_diagonal`` cuts every cell along the same (bottom-left to
    top-right) diagonal.  ``alternating`` flips the diagonal in a
    checkerboard fashion.
    """
    if pattern not in (ALTERNATING, SINGLE_DIAGONAL):
        raise MeshError(f"unknown triangle pattern {pattern!r}")
    nodes, h = _grid(n, domain)
    tris = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b, c, d = a + 1, a + n + 2, a + n + 1
            if pattern == SINGLE_DIAGONAL or (i + j) % 2 == 0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    return Mesh(nodes, np.array(tris, dtype=int), TRI, h)


@dataclass(frozen=True)
class FaceTopology:
    """Unique faces of a mesh.

    ``faces[F]`` holds the two vertex indices in ascending order.  The
    ``elem_faces[e, f]`` array maps each element-local face to its global
    face and ``elem_face_flip[e, f]`` is True when the element traverses the
    face against its global orientation (the face-node permutation is then a
    reversal).
    """
    faces: np.ndarray           # (n_faces, 2)
    left: np.ndarray            # (n_faces, 2) element, local face
    right: np.ndarray           # (n_faces, 2) element, local face, -1 if boundary
    tags: np.ndarray            # (n_faces,) INTERIOR / DIRICHLET / NEUMANN
    elem_faces: np.ndarray      # (n_el, nfa)
    elem_face_flip: np.ndarray  # (n_el, nfa) bool

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    def count(self, tag: int) -> int:
        return int(np.sum(self.tags == tag))

    def elem_face_tags(self) -> np.ndarray:
        return self.tags[self.elem_faces]

    def permutation(self, e: int, f: int, n_fn: int) -> np.ndarray:
        """Map from element-local face node order to the global face node order."""
        idx = np.arange(n_fn)
        return idx[::-1].copy() if self.elem_face_flip[e, f] else idx


BoundarySpec = Callable[[np.ndarray], bool]
"""Predicate on a boundary face midpoint: True for Neumann, False for Dirichlet."""


def all_dirichlet(midpoint) -> bool:
    return False


def neumann_on_bottom(midpoint, tol: float = 1e-12) -> bool:
    return abs(midpoint[1]) < tol


def extract_faces(mesh: Mesh, is_neumann: BoundarySpec = all_dirichlet) -> FaceTopology:
    n_el, nv = mesh.elements.shape
    face_index: dict[tuple[int, int], int] = {}
    faces, left, right = [], [], []
    elem_faces = np.empty((n_el, nv), dtype=int)
    flip = np.zeros((n_el, nv), dtype=bool)
    for e, verts in enumerate(mesh.elements):
        for f in range(nv):
            a, b = int(verts[f]), int(verts[(f + 1) % nv])
            key = (a, b) if a < b else (b, a)
            flip[e, f] = a > b
            F = face_index.get(key)
            if F is None:
                F = len(faces)
                face_index[key] = F
                faces.append(key)
                left.append((e, f))
                right.append((-1, -1))
            elif right[F][0] >= 0:
                raise TopologyError(f"face {key} shared by more than two elements")
            else:
                right[F] = (e, f)
            elem_faces[e, f] = F
    faces = np.array(faces, dtype=int)
    right = np.array(right, dtype=int)
    tags = np.full(len(faces), INTERIOR, dtype=int)
    for F in np.flatnonzero(right[:, 0] < 0):
        mid = mesh.nodes[faces[F]].mean(axis=0)
        tags[F] = NEUMANN if is_neumann(mid) else DIRICHLET
    if not np.any(tags == DIRICHLET):
        raise TopologyError("the Dirichlet boundary must not be empty")
    return FaceTopology(faces, np.array(left, dtype=int), right, tags, elem_faces, flip)
