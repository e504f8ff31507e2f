# h-convergence of the HDG solver on the sinusoidal manufactured solution.
#
# Run from the repository root:  python notebooks/convergence_study.py
import numpy as np

from hdg_voigt import StudyConfig, run_convergence_options

# Quadrilaterals first.  All three rotational constraints of the post-process
# share one HDG solve per mesh, so asking for them together is cheap.
cfg = StudyConfig(case="sinusoidal2d", elem="quad", degree=2, levels=(4, 8, 16), tau=3.0)
reports = run_convergence_options(cfg)
print(reports["opt3"].to_csv())

# The observed orders are in the last three columns.  For k=2 the displacement
# and the mixed variable converge like h^3 and the post-processed u* like h^4.
for opt, rep in reports.items():
    print(opt, "final EOC of u*:", round(rep.final.eoc_ustar, 2))

# Triangles with alternating diagonals behave differently for the post-process:
# the mean-curl constraint (opt2) loses the extra order.
tri = run_convergence_options(StudyConfig(elem="tri", degree=2, levels=(4, 8, 16)))
for opt, rep in tri.items():
    print("tri", opt, "EOC u*:", np.round(rep.column("eoc_ustar")[1:], 2))
