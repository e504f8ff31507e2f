"""Legacy ASCII VTK output for discontinuous element fields.

Each element gets its own copy of its vertices, so fields that jump across
faces are written without averaging.  Only vertex values are written; for
k > 1 the interior nodes are dropped (enough for visual inspection).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .mesh import QUAD, Mesh
from .solver import compute_von_mises
from .voigt import PLANE_STRAIN

VTK_TRIANGLE = 5
VTK_QUAD = 9


def _cells(mesh: Mesh):
    ne, nv = mesh.elements.shape
    pts = mesh.vertex_coords().reshape(ne * nv, 2)
    conn = np.arange(ne * nv).reshape(ne, nv)
    ctype = VTK_QUAD if mesh.elem_type == QUAD else VTK_TRIANGLE
    return pts, conn, ctype


def _header(lines, pts, conn, ctype, title):
    lines += ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID",
              f"POINTS {len(pts)} double"]
    lines += [f"{x:.16e} {y:.16e} 0.0" for x, y in pts]
    ne, nv = conn.shape
    lines.append(f"CELLS {ne} {ne * (nv + 1)}")
    lines += [f"{nv} " + " ".join(map(str, c)) for c in conn]
    lines.append(f"CELL_TYPES {ne}")
    lines += [str(ctype)] * ne


def write_mesh_vtk(path, mesh: Mesh, title: str = "hdg mesh") -> Path:
    """Mesh only, with the element index as cell data."""
    pts, conn, ctype = _cells(mesh)
    lines = []
    _header(lines, pts, conn, ctype, title)
    lines += [f"CELL_DATA {mesh.n_elements}", "SCALARS element int 1", "LOOKUP_TABLE default"]
    lines += [str(e) for e in range(mesh.n_elements)]
    return _write(path, lines)


def write_fields_vtk(path, mesh: Mesh, u: np.ndarray, sigma: np.ndarray, nu: float = 0.0,
                     plane: str = PLANE_STRAIN, title: str = "hdg solution") -> Path:
    """Displacement, Voigt stress and von Mises stress at element vertices.

    ``u`` is (ne, nen, 2) and ``sigma`` is (ne, nen, 3); the first nodes of
    every element are its vertices.
    """
    pts, conn, ctype = _cells(mesh)
    nv = conn.shape[1]
    uv = np.asarray(u)[:, :nv].reshape(-1, 2)
    sv = np.asarray(sigma)[:, :nv].reshape(-1, 3)
    vm = compute_von_mises(sv, nu, plane)
    lines = []
    _header(lines, pts, conn, ctype, title)
    lines += [f"POINT_DATA {len(pts)}", "VECTORS displacement double"]
    lines += [f"{a:.16e} {b:.16e} 0.0" for a, b in uv]
    lines += ["SCALARS stress_voigt double 3", "LOOKUP_TABLE default"]
    lines += [" ".join(f"{v:.16e}" for v in s) for s in sv]
    lines += ["SCALARS von_mises double 1", "LOOKUP_TABLE default"]
    lines += [f"{v:.16e}" for v in vm]
    return _write(path, lines)


def write_solution_vtk(path, level, nu: float = 0.0, plane: str = PLANE_STRAIN) -> Path:
    """Convenience wrapper for a :class:`hdg_voigt.harness.LevelResult`."""
    f = level.solution.fields
    return write_fields_vtk(path, level.mesh, f.u, f.sigma, nu, plane)


def _write(path, lines) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path
