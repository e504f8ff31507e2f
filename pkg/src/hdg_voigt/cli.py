"""``hdg-voigt`` command line: convergence runs, tau sweeps and nu sweeps."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .harness import StudyConfig
from .manufactured import CASES

# config-file keys -> StudyConfig fields
_KEYS = {"case": "case", "elem": "elem", "pattern": "pattern", "degree": "degree", "levels": "levels",
         "tau": "tau", "nu": "nu", "plane": "plane", "postprocess": "postprocess", "variant": "variant",
         "out": "out", "vtk": "vtk_dir", "vtk_dir": "vtk_dir", "tau_list": "tau_list", "nu_list": "nu_list",
         "sweep_n": "sweep_n"}


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in str(text).replace(" ", "").split(",") if v)


def read_config(path) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment, dashes in keys are allowed."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (t.strip() for t in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[_KEYS[key]] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so that config-file values are only overridden by explicit flags
    common.add_argument("--config", help="key=value file; command-line flags override it")
    common.add_argument("--case", choices=sorted(CASES))
    common.add_argument("--elem", choices=["quad", "tri"])
    common.add_argument("--pattern", choices=["alternating", "single-diagonal", "single_diagonal"])
    common.add_argument("--degree", type=int, choices=[1, 2, 3])
    common.add_argument("--levels", help="comma separated mesh divisions, e.g. 4,8,16,32")
    common.add_argument("--tau", type=float)
    common.add_argument("--nu", type=float, help="Poisson ratio override")
    common.add_argument("--plane", choices=["strain", "stress"])
    common.add_argument("--postprocess", choices=["opt1", "opt2", "opt3"])
    common.add_argument("--variant", choices=["solenoidal", "as_printed"],
                        help="exact solution of the incompressible case")
    common.add_argument("--out", help="CSV report path")
    common.add_argument("--assert", dest="check", action="store_true",
                        help="check the convergence gates; exit status 1 if any fails")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hdg-voigt", description="HDG solver for 2D linear elasticity")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="h-convergence study")
    run.add_argument("--vtk", dest="vtk_dir", help="write one VTK file per level into this directory")
    tau = sub.add_parser("tau-sweep", parents=[common], help="errors against the stabilisation parameter")
    tau.add_argument("--tau-list", help="comma separated tau values")
    tau.add_argument("--sweep-n", type=int, help="mesh divisions (default: last level)")
    nu = sub.add_parser("nu-sweep", parents=[common], help="convergence for several Poisson ratios")
    nu.add_argument("--nu-list", help="comma separated Poisson ratios")
    return p


def resolve(args: argparse.Namespace) -> tuple[StudyConfig, dict]:
    """Merge defaults, config file and flags into a :class:`StudyConfig` plus sweep extras."""
    values = read_config(args.config) if args.config else {}
    for key in set(_KEYS.values()):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    extras = {k: values.pop(k) for k in ("tau_list", "nu_list", "sweep_n") if k in values}
    if "sweep_n" in extras:
        extras["sweep_n"] = int(extras["sweep_n"])
    if "degree" in values:
        values["degree"] = int(values["degree"])
    if "levels" in values:
        values["levels"] = _ints(values["levels"])
    else:
        values["levels"] = harness.DEFAULT_LEVELS.get(values.get("degree", 1), (4, 8, 16, 32))
    for key in ("tau", "nu"):
        if key in values:
            values[key] = float(values[key])
    return StudyConfig(**values), extras


def _print_report(report, stream):
    stream.write(report.to_csv())
    for n, msg in report.failures:
        stream.write(f"# level n={n} aborted: {msg}\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config, extras = resolve(args)
    except (ValueError, OSError) as exc:
        print(f"hdg-voigt: error: {exc}", file=sys.stderr)
        return 2

    out = sys.stdout
    gates = []
    if args.command == "run":
        report = harness.run_convergence(config)
        _print_report(report, out)
        gates = harness.convergence_gates(report)
    elif args.command == "tau-sweep":
        taus = _floats(extras["tau_list"]) if "tau_list" in extras else harness.TAU_SWEEP
        sweep = harness.run_tau_sweep(config, taus, extras.get("sweep_n"))
        out.write(sweep.to_csv())
        gates = harness.tau_gates(sweep)
    else:
        nus = _floats(extras["nu_list"]) if "nu_list" in extras else harness.NU_SWEEP
        reports = harness.run_nu_sweep(config, nus)
        for nu, rep in reports.items():
            out.write(f"# nu={nu:g}\n")
            _print_report(rep, out)
        gates = harness.nu_gates(reports)

    if args.check:
        for g in gates:
            print(g.line(), file=sys.stderr)
        return 0 if all(g.passed for g in gates) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
