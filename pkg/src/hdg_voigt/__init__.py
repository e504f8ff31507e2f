"""HDG discretisation of 2D linear elasticity written in Voigt notation.

Typical use::

    from hdg_voigt import StudyConfig, run_convergence
    report = run_convergence(StudyConfig(elem="tri", degree=2))
    print(report.to_csv())

Lower-level pieces live in the submodules: :mod:`voigt` (operators and
material), :mod:`mesh`, :mod:`fespace`, :mod:`assembly`, :mod:`solver`,
:mod:`postprocess`, :mod:`manufactured`, :mod:`harness` and :mod:`vtk`.
"""
from .assembly import DEFAULT_TAU, ProblemData, assemble_local, condense, local_back_solve
from .fespace import lagrange_reference, map_elements, quadrature
from .harness import (ConvergenceReport, StudyConfig, run_convergence, run_convergence_options,
                      run_nu_sweep, run_tau_sweep)
from .manufactured import CASES, case_incompressible_2d, case_sinusoidal_2d, l2_error
from .mesh import Mesh, extract_faces, structured_quad_mesh, structured_tri_mesh
from .postprocess import RotationalConstraint, postprocess
from .solver import HDGSolution, compute_von_mises, solve_hdg
from .voigt import MaterialParams, build_constitutive

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TAU", "ProblemData", "assemble_local", "condense", "local_back_solve",
    "lagrange_reference", "map_elements", "quadrature",
    "ConvergenceReport", "StudyConfig", "run_convergence", "run_convergence_options",
    "run_nu_sweep", "run_tau_sweep",
    "CASES", "case_incompressible_2d", "case_sinusoidal_2d", "l2_error",
    "Mesh", "extract_faces", "structured_quad_mesh", "structured_tri_mesh",
    "RotationalConstraint", "postprocess",
    "HDGSolution", "compute_von_mises", "solve_hdg",
    "MaterialParams", "build_constitutive",
]
