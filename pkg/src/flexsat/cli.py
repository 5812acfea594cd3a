"""Command-line entry point: ``flexsat {simulate,modes,verify,equilibrium}``."""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import logging
import sys
import warnings
from typing import Optional, Sequence

import numpy as np

from . import verification
from .basis import fd_frequencies
from .csvio import CsvSink, state_from_csv
from .dynamics import Flavor, Mode
from .errors import DivergenceError, FlexsatError, ScenarioError
from .scenario import default_scenario, load_scenario_file, validate
from .simulation import integrate

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_DIVERGED, EXIT_VERIFY = 0, 1, 2, 3, 4

MODE_FLAGS = {"closed": Mode.CLOSED, "open-trunc": Mode.OPEN_TRUNCATED, "open-full": Mode.OPEN_FULL}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=sorted(MODE_FLAGS))
    common.add_argument("--flavor", choices=[f.value for f in Flavor])
    common.add_argument("--dt", type=float)
    common.add_argument("--t-end", type=float, dest="t_end")
    common.add_argument("--modes", type=int, metavar="N")
    common.add_argument("--delta", type=float, metavar="X")

    parser = _Parser(prog="flexsat", description="Flexible-boom satellite simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sim = sub.add_parser("simulate", parents=[common], help="integrate and write a CSV time series")
    sim.add_argument("--scenario", metavar="PATH", help="scenario file (required)")
    sim.add_argument("--out", metavar="PATH", help="output CSV (default: output.path or stdout)")
    sim.add_argument("--resume", metavar="CSV", help="start from the last state stored in a CSV file")
    parser.simulate_parser = sim
    for name, text in (("modes", "print the modal basis tables"),
                       ("verify", "run the invariant and identity checks"),
                       ("equilibrium", "print the equilibrium and its residual")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--scenario", metavar="PATH", help="scenario file (default: bundled scenario)")
    return parser


def _scenario(args):
    if args.scenario is None:
        if args.command == "simulate":
            raise UsageError("flexsat simulate: error: --scenario PATH is required", "simulate")
        scenario = default_scenario()
    else:
        try:
            scenario = load_scenario_file(args.scenario)
        except OSError as exc:
            raise UsageError(f"cannot read scenario: {exc}") from None
    changes = {}
    if args.mode:
        changes["mode"] = MODE_FLAGS[args.mode]
    if args.flavor:
        changes["flavor"] = Flavor(args.flavor)
    if args.modes is not None:
        changes["n_modes"] = args.modes
    if args.delta is not None:
        if scenario.explicit_state is not None:
            raise ScenarioError("--delta cannot override an explicit initial.state")
        if args.delta < 0:
            raise ScenarioError("must be non-negative", key="--delta")
        changes["delta"] = args.delta
    integ = {}
    if args.dt is not None:
        integ["dt"] = args.dt
    if args.t_end is not None:
        integ["t_end"] = args.t_end
    if integ:
        changes["integrator"] = dataclasses.replace(scenario.integrator, **integ)
    if getattr(args, "resume", None):
        try:
            changes["explicit_state"] = state_from_csv(args.resume)
        except (OSError, ValueError, IndexError) as exc:
            raise UsageError(f"cannot resume from {args.resume}: {exc}") from None
    if changes:
        scenario = validate(dataclasses.replace(scenario, **changes))
    return scenario


def _simulate(scenario, args, out) -> int:
    system = scenario.system()
    x0 = scenario.initial_state(system)
    path = args.out or scenario.output_path
    with contextlib.ExitStack() as stack:
        stream = stack.enter_context(open(path, "w", newline="")) if path else out
        summary = integrate(x0, scenario.integrator, system, CsvSink(stream, system.n))
    print(f"steps={summary.steps} t_final={summary.t_final:.6g} V0={summary.V0:.6e} "
          f"Vmin={summary.V_min:.6e} sup_y={summary.sup_y:.6e} "
          f"max|decay_residual|={summary.max_decay_residual:.3e} "
          f"max|q_drift|={summary.max_q_drift:.3e} "
          f"max|u|=({', '.join(f'{v:.4g}' for v in summary.max_abs_u)})", file=sys.stderr)
    return EXIT_OK


def _modes(scenario, out) -> int:
    system = scenario.system()
    basis, params = system.basis, scenario.params
    modal = basis.natural_frequencies(params)
    fd = fd_frequencies(params, verification.FD_GRID, basis.n_modes)
    print(f"{'k':>3} {'beta_k*ell':>14} {'beta_k [1/m]':>14} {'omega_k [rad/s]':>16} "
          f"{'omega_fd [rad/s]':>17} {'b_k [m^2]':>14}", file=out)
    for k in range(basis.n_modes):
        print(f"{k + 1:>3} {basis.beta_ell[k]:>14.10f} {basis.beta[k]:>14.8f} {modal[k]:>16.8f} "
              f"{fd[k]:>17.8f} {basis.b[k]:>14.8f}", file=out)
    for name, value in basis.defects().items():
        print(f"{name + ' defect':<22} {value:.3e}", file=out)
    return EXIT_OK


def _verify(scenario, out) -> int:
    results = verification.run_checks(scenario.system(), seed=verification.seed_from_env())
    for r in results:
        print(r.line(), file=out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def _equilibrium(scenario, out) -> int:
    system = scenario.system()
    x = system.equilibrium
    print("equilibrium state (a1 | p1 | a2 | p2 | omega | q):", file=out)
    print(" ".join(format(v, ".17g") for v in x), file=out)
    print(f"max |rhs| over all modes and flavors: {verification.equilibrium_residual(system):.3e}", file=out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        scenario = _scenario(args)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            if args.command == "simulate":
                return _simulate(scenario, args, out)
            if args.command == "modes":
                return _modes(scenario, out)
            if args.command == "verify":
                return _verify(scenario, out)
            return _equilibrium(scenario, out)
    except UsageError as exc:
        if exc.args[1:] == ("simulate",):
            parser.simulate_parser.print_usage(sys.stderr)
        print(exc.args[0], file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except DivergenceError as exc:
        print(f"flexsat: diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (FlexsatError, ValueError) as exc:
        print(f"flexsat: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


run_cli = main


if __name__ == "__main__":
    sys.exit(main())
