"""Refinement studies, stabilisation and Poisson-ratio sweeps, CSV reports.

A study runs the full chain (mesh, local solves, condensation, trace solve,
recovery, post-process) on a family of uniform meshes and records L2 errors
of ``u``, ``L`` and ``u*`` together with the observed orders.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .manufactured import CASES, SOLENOIDAL, ManufacturedCase, l2_error
from .mesh import ALTERNATING, QUAD, SINGLE_DIAGONAL, TRI, extract_faces, structured_quad_mesh, structured_tri_mesh
from .postprocess import RotationalConstraint, constraint_residuals, postprocess
from .solver import SolverError, solve_hdg
from .voigt import PLANE_STRAIN, PLANE_STRESS

log = logging.getLogger(__name__)

CSV_HEADER = ("n", "h", "ndof_trace", "err_u", "err_L", "err_ustar", "eoc_u", "eoc_L", "eoc_ustar")
DEFAULT_LEVELS = {1: (4, 8, 16, 32), 2: (4, 8, 16, 32), 3: (4, 8, 16)}
TAU_SWEEP = (0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0)
NU_SWEEP = (0.49, 0.499, 0.4999, 0.49999)


def _norm_pattern(p: str) -> str:
    return str(p).replace("-", "_")


def _norm_plane(p: str) -> str:
    p = str(p)
    return {"strain": PLANE_STRAIN, "stress": PLANE_STRESS}.get(p, p)


@dataclass(frozen=True)
class StudyConfig:
    case: str = "sinusoidal2d"
    elem: str = QUAD
    pattern: str = ALTERNATING
    degree: int = 1
    levels: tuple = (4, 8, 16, 32)
    tau: float = 3.0
    nu: float | None = None          # None keeps the case default
    plane: str = PLANE_STRAIN
    postprocess: str = "opt3"
    variant: str = SOLENOIDAL        # incompressible case only
    out: str | None = None
    vtk_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "pattern", _norm_pattern(self.pattern))
        object.__setattr__(self, "plane", _norm_plane(self.plane))
        object.__setattr__(self, "levels", tuple(int(n) for n in self.levels))
        object.__setattr__(self, "postprocess", RotationalConstraint.parse(self.postprocess).short)
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; choose from {sorted(CASES)}")
        if self.elem not in (QUAD, TRI):
            raise ValueError(f"unknown element type {self.elem!r}")
        if self.pattern not in (ALTERNATING, SINGLE_DIAGONAL):
            raise ValueError(f"unknown triangle pattern {self.pattern!r}")
        if self.plane not in (PLANE_STRAIN, PLANE_STRESS):
            raise ValueError(f"unknown plane assumption {self.plane!r}")
        if self.degree not in (1, 2, 3):
            raise ValueError(f"degree must be 1, 2 or 3, got {self.degree}")
        if len(self.levels) < 2:
            raise ValueError("at least two refinement levels are needed for an order estimate")
        if any(n < 1 for n in self.levels):
            raise ValueError("refinement levels must be positive")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    def build_case(self) -> ManufacturedCase:
        kw = {"plane": self.plane}
        if self.nu is not None:
            kw["nu"] = float(self.nu)
        if self.case == "incompressible2d":
            kw["variant"] = self.variant
        return CASES[self.case](**kw)

    def build_mesh(self, n: int):
        if self.elem == QUAD:
            return structured_quad_mesh(n)
        return structured_tri_mesh(n, self.pattern)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    h: float
    ndof_trace: int
    err_u: float
    err_L: float
    err_ustar: float
    eoc_u: float = math.nan
    eoc_L: float = math.nan
    eoc_ustar: float = math.nan

    def as_tuple(self):
        return tuple(getattr(self, c) for c in CSV_HEADER)


def observed_order(e_prev, e_cur, h_prev, h_cur) -> float:
    if not (e_prev > 0 and e_cur > 0):
        return math.nan
    return math.log(e_prev / e_cur) / math.log(h_prev / h_cur)


@dataclass
class ConvergenceReport:
    config: StudyConfig
    rows: list = field(default_factory=list)
    max_constraint_residual: float = 0.0
    failures: list = field(default_factory=list)   # (n, message) of aborted levels

    def add(self, n, h, ndof, eu, eL, es):
        eoc = (math.nan,) * 3
        if self.rows:
            p = self.rows[-1]
            eoc = tuple(observed_order(a, b, p.h, h)
                        for a, b in ((p.err_u, eu), (p.err_L, eL), (p.err_ustar, es)))
        self.rows.append(ConvergenceRow(n, h, ndof, eu, eL, es, *eoc))

    @property
    def final(self) -> ConvergenceRow:
        return self.rows[-1]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r.as_tuple()])
        return buf.getvalue()

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        return path


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17e}"


@dataclass(frozen=True)
class LevelResult:
    """Everything computed on one mesh, kept for VTK output and inspection."""
    mesh: object
    solution: object
    ustar: np.ndarray
    errors: tuple
    constraint_residual: float


def solve_level(config: StudyConfig, n: int, case: ManufacturedCase | None = None,
                options=None) -> dict:
    """Solve one mesh and post-process with each option (default: the configured one).

    Returns ``{option: LevelResult}``; all results share the same HDG solve.
    """
    case = case or config.build_case()
    options = [config.postprocess] if options is None else [RotationalConstraint.parse(o).short for o in options]
    k = config.degree
    mesh = config.build_mesh(n)
    topo = extract_faces(mesh, case.is_neumann)
    sol = solve_hdg(mesh, topo, k, case.problem_data(config.tau))
    f = sol.fields
    e_u = l2_error(f.u, case.u, mesh, k)
    e_L = l2_error(f.L, case.mixed, mesh, k)
    out = {}
    for opt in options:
        ustar, prob = postprocess(mesh, k, sol.const, f.L, f.u, opt, f.uhat_e, topo.elem_face_tags(), case.u)
        res = float(constraint_residuals(prob, ustar).max())
        out[opt] = LevelResult(mesh, sol, ustar, (e_u, e_L, l2_error(ustar, case.u, mesh, k + 1)), res)
    return out


def run_convergence(config: StudyConfig) -> ConvergenceReport:
    """h-convergence study over ``config.levels``."""
    return run_convergence_options(config, [config.postprocess])[config.postprocess]


def run_convergence_options(config: StudyConfig, options=("opt1", "opt2", "opt3")) -> dict:
    """Like :func:`run_convergence` for several post-process options at once.

    Each level is solved once; ``config.out`` and ``config.vtk_dir`` are only
    honoured for the configured option.
    """
    options = [RotationalConstraint.parse(o).short for o in options]
    case = config.build_case()
    reports = {o: ConvergenceReport(replace(config, postprocess=o)) for o in options}
    for n in config.levels:
        try:
            lvls = solve_level(config, n, case, options)
        except (SolverError, np.linalg.LinAlgError) as exc:
            log.error("level n=%d aborted: %s", n, exc)
            for rep in reports.values():
                rep.failures.append((n, str(exc)))
                rep.add(n, config.build_mesh(n).h, 0, math.nan, math.nan, math.nan)
            continue
        for o, lvl in lvls.items():
            rep = reports[o]
            rep.max_constraint_residual = max(rep.max_constraint_residual, lvl.constraint_residual)
            rep.add(n, lvl.mesh.h, lvl.solution.dofmap.ndof, *lvl.errors)
        lvl = lvls.get(config.postprocess)
        if lvl is not None:
            log.info("n=%d e_u=%.3e e_L=%.3e e_u*=%.3e", n, *lvl.errors)
            if config.vtk_dir:
                from .vtk import write_solution_vtk
                name = f"{config.case}_{config.elem}_k{config.degree}_n{n}.vtk"
                write_solution_vtk(Path(config.vtk_dir) / name, lvl,
                                   nu=case.material.poisson_ratio, plane=case.material.plane_assumption)
    if config.out and config.postprocess in reports:
        reports[config.postprocess].write(config.out)
    return reports


@dataclass
class TauSweep:
    config: StudyConfig
    n: int
    rows: list = field(default_factory=list)   # (tau, e_u, e_L, e_u*)

    def column(self, j: int) -> np.ndarray:
        return np.array([r[j] for r in self.rows], dtype=float)

    def argmin(self, name: str) -> float:
        j = {"err_u": 1, "err_L": 2, "err_ustar": 3}[name]
        return float(self.rows[int(np.nanargmin(self.column(j)))][0])

    def to_csv(self) -> str:
        lines = ["tau,err_u,err_L,err_ustar"]
        lines += [",".join(_fmt(float(v)) for v in r) for r in self.rows]
        return "\n".join(lines) + "\n"


def run_tau_sweep(config: StudyConfig, taus=TAU_SWEEP, n: int | None = None) -> TauSweep:
    """Errors on one fixed mesh (the last level unless ``n`` is given) for each tau."""
    n = config.levels[-1] if n is None else int(n)
    sweep = TauSweep(config, n)
    case = config.build_case()
    for tau in taus:
        lvl = solve_level(replace(config, tau=float(tau)), n, case)[config.postprocess]
        sweep.rows.append((float(tau), *lvl.errors))
    if config.out:
        Path(config.out).write_text(sweep.to_csv())
    return sweep


def run_nu_sweep(config: StudyConfig, nus=NU_SWEEP) -> dict:
    """One convergence report per Poisson ratio; ``config.out`` gets a ``_nu<value>`` suffix."""
    reports = {}
    for nu in nus:
        out = None
        if config.out:
            p = Path(config.out)
            out = str(p.with_name(f"{p.stem}_nu{nu:g}{p.suffix or '.csv'}"))
        reports[float(nu)] = run_convergence(replace(config, nu=float(nu), out=out))
    return reports


def nu_spread(reports: dict, level: int = -1) -> float:
    """Ratio max/min of e_u across the sweep on one mesh level."""
    e = np.array([r.rows[level].err_u for r in reports.values()])
    return float(e.max() / e.min())


# --- acceptance gates -------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def convergence_gates(report: ConvergenceReport, residual_tol: float = 1e-10) -> list:
    """Order checks on the last pair of levels for a single study."""
    cfg, r, k = report.config, report.final, report.config.degree
    tag = f"{cfg.elem}{'/' + cfg.pattern if cfg.elem == TRI else ''} k={k} {cfg.postprocess}"
    gates = [Gate(f"EOC_u {tag}", r.eoc_u >= k + 0.9, f"{r.eoc_u:.3f} >= {k + 0.9}"),
             Gate(f"EOC_L {tag}", r.eoc_L >= k + 0.9, f"{r.eoc_L:.3f} >= {k + 0.9}")]
    opt = cfg.postprocess
    if opt == "opt3":
        gates.append(Gate(f"EOC_u* {tag}", r.eoc_ustar >= k + 1.8, f"{r.eoc_ustar:.3f} >= {k + 1.8}"))
        better = bool(np.all(report.column("err_ustar")[1:] < report.column("err_u")[1:]))
        gates.append(Gate(f"e_u* < e_u {tag}", better, "levels beyond the first"))
    elif opt == "opt2" and cfg.elem == TRI:
        gates.append(Gate(f"EOC_u* {tag}", r.eoc_ustar <= k + 1.3, f"{r.eoc_ustar:.3f} <= {k + 1.3}"))
    elif opt == "opt1" and cfg.elem == TRI:
        if k == 1:
            gates.append(Gate(f"EOC_u* {tag}", 2.1 <= r.eoc_ustar <= 2.7, f"{r.eoc_ustar:.3f} in [2.1, 2.7]"))
        else:
            gates.append(Gate(f"EOC_u* {tag}", r.eoc_ustar >= k + 1.7, f"{r.eoc_ustar:.3f} >= {k + 1.7}"))
    gates.append(Gate(f"constraints {tag}", report.max_constraint_residual <= residual_tol,
                      f"{report.max_constraint_residual:.2e} <= {residual_tol:.0e}"))
    if report.failures:
        gates.append(Gate(f"levels {tag}", False, f"aborted levels {[n for n, _ in report.failures]}"))
    return gates


def tau_gates(sweep: TauSweep) -> list:
    cfg = sweep.config
    tag = f"{cfg.elem} k={cfg.degree} n={sweep.n}"
    tL, tu = sweep.argmin("err_L"), sweep.argmin("err_u")
    return [Gate(f"argmin e_L {tag}", tL in (1.0, 3.0, 10.0), f"tau={tL:g} in {{1,3,10}}"),
            Gate(f"argmin e_u >= argmin e_L {tag}", tu >= tL, f"{tu:g} >= {tL:g}")]


def nu_gates(reports: dict) -> list:
    gates = []
    for nu, rep in reports.items():
        for g in convergence_gates(rep):
            if g.name.startswith(("EOC_u ", "EOC_u* ", "constraints", "levels")):
                gates.append(replace(g, name=f"{g.name} nu={nu:g}"))
    k = next(iter(reports.values())).config.degree
    for lvl in range(len(next(iter(reports.values())).rows)):
        s = nu_spread(reports, lvl)
        gates.append(Gate(f"e_u spread over nu k={k} level {lvl}", s < 5.0, f"{s:.3f} < 5"))
    return gates


__all__ = ["StudyConfig", "ConvergenceRow", "ConvergenceReport", "LevelResult", "TauSweep", "Gate",
           "CSV_HEADER", "DEFAULT_LEVELS", "TAU_SWEEP", "NU_SWEEP", "observed_order", "solve_level",
           "run_convergence", "run_convergence_options", "run_tau_sweep", "run_nu_sweep", "nu_spread", "convergence_gates",
           "tau_gates", "nu_gates"]
