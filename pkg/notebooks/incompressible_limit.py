# Nearly incompressible benchmark: errors should not blow up as nu -> 1/2.
#
# Run from the repository root:  python notebooks/incompressible_limit.py
from dataclasses import replace

from hdg_voigt import StudyConfig
from hdg_voigt.harness import NU_SWEEP, nu_spread, run_nu_sweep

cfg = StudyConfig(case="incompressible2d", elem="tri", pattern="single_diagonal", degree=2,
                  levels=(4, 8, 16))
reports = run_nu_sweep(cfg, NU_SWEEP)
for nu, rep in reports.items():
    r = rep.final
    print(f"nu={nu:<8g} e_u={r.err_u:.3e}  EOC_u={r.eoc_u:.2f}  EOC_u*={r.eoc_ustar:.2f}")

# ratio of the largest to the smallest e_u on the finest mesh
print("spread:", round(nu_spread(reports), 3))

# The exact solution taken literally from the benchmark (u2 = -u1) is not
# divergence free; its error grows with the Lame parameter instead.
printed = run_nu_sweep(replace(cfg, variant="as_printed"), (0.49, 0.4999))
print("as_printed spread:", round(nu_spread(printed), 1))
