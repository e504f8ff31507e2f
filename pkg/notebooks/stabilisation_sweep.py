# Effect of the stabilisation parameter tau on a fixed mesh.
#
# Run from the repository root:  python notebooks/stabilisation_sweep.py
from hdg_voigt import StudyConfig
from hdg_voigt.harness import TAU_SWEEP, run_tau_sweep

for elem in ("quad", "tri"):
    sweep = run_tau_sweep(StudyConfig(elem=elem, degree=1, levels=(4, 8)), TAU_SWEEP)
    print(f"# {elem}, k=1, n={sweep.n}")
    print(sweep.to_csv())
    # small tau spoils the displacement, large tau spoils the stress
    print("argmin e_u:", sweep.argmin("err_u"), " argmin e_L:", sweep.argmin("err_L"))
