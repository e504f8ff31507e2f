# A single HDG solve by hand, without the study harness.
#
# Run from the repository root:  python notebooks/single_solve.py
import numpy as np

from hdg_voigt import case_sinusoidal_2d, extract_faces, l2_error, postprocess, solve_hdg, structured_tri_mesh
from hdg_voigt.solver import compute_von_mises
from hdg_voigt.vtk import write_fields_vtk

case = case_sinusoidal_2d()
mesh = structured_tri_mesh(8)
topo = extract_faces(mesh, case.is_neumann)     # Neumann on the bottom edge
sol = solve_hdg(mesh, topo, 2, case.problem_data(tau=3.0))
f = sol.fields
print("trace unknowns:", sol.dofmap.ndof)
print("e_u =", l2_error(f.u, case.u, mesh, 2))
print("e_L =", l2_error(f.L, case.mixed, mesh, 2))

# element-by-element post-process of degree k+1
ustar, _ = postprocess(mesh, 2, sol.const, f.L, f.u, "opt3", f.uhat_e, topo.elem_face_tags(), case.u)
print("e_u* =", l2_error(ustar, case.u, mesh, 3))

vm = compute_von_mises(f.sigma, case.material.poisson_ratio)
print("max von Mises:", np.max(vm))
write_fields_vtk("single_solve.vtk", mesh, f.u, f.sigma, case.material.poisson_ratio)
