# flowpepa/cli.py
"""
Command-line front end.

    flowpepa check models/mapk.pfa
    flowpepa translate models/mapk.pfa -o mapk.biopepa
    flowpepa simulate models/mapk.pfa --method gibson-bruck --seed 1 --replicas 10 --t-end auto
    flowpepa stats models/mapk.pfa --replicas 20 --set m_E1.count=21

Exit codes: 0 success, 1 model or runtime failure, 2 usage, configuration
or file-system failure. Diagnostics go to stderr as
`file:line:col: severity[code]: message`.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from flowpepa.biopepa import check_output, generate, render
from flowpepa.ensemble import Method, auto_horizon, ensemble_run, ensemble_stats, plateau, run_replicas, simulate
from flowpepa.errors import ConfigError, FlowPepaError, NumericalError, UsageError
from flowpepa.model import Document, is_valid, validate
from flowpepa.network import ReactionNetwork, compile_network
from flowpepa.overrides import apply_overrides
from flowpepa.parser import parse_file
from flowpepa.settings import METHODS, Settings
from flowpepa.ssa import WatchLevel
from flowpepa.types import Diagnostic

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

AUTO = "auto"

Horizon = Union[float, str]


# ============================================================
# Diagnostics
# ============================================================


def format_diagnostic(source: str, diagnostic: Diagnostic) -> str:
    """`file:line:col: severity[code]: message`; document-level findings point at 1:1."""
    span = diagnostic.span
    line, column = (span.line, span.column) if span is not None else (1, 1)
    return f"{source}:{line}:{column}: {diagnostic.severity.value}[{diagnostic.code}]: {diagnostic.message}"


def _report(source: str, diagnostics: Iterable[Diagnostic]) -> None:
    for diagnostic in diagnostics:
        print(format_diagnostic(source, diagnostic), file=sys.stderr)


def _error(message: str) -> None:
    print(f"flowpepa: error: {message}", file=sys.stderr)


# ============================================================
# Shared steps
# ============================================================


def _load(path: str, assignments: Sequence[str]) -> Optional[Document]:
    """Parse, apply --set overrides and validate; None once errors are reported."""
    try:
        result = parse_file(path)
    except UnicodeDecodeError as exc:
        raise UsageError(f"{path}: not UTF-8 text ({exc.reason})") from exc
    _report(path, result.diagnostics)
    if result.document is None:
        return None
    doc = apply_overrides(result.document, assignments) if assignments else result.document
    diagnostics = validate(doc)
    _report(path, diagnostics)
    if not is_valid(diagnostics):
        return None
    return doc


def _run_settings(args: argparse.Namespace, settings: Settings) -> Settings:
    method = args.method or settings.simulation.method
    if method == Method.ODE.value and (args.seed is not None or args.replicas is not None):
        raise UsageError("--method ode is deterministic and takes no --seed or --replicas")
    t_end = None if args.t_end == AUTO else args.t_end
    return settings.with_simulation(
        method=args.method,
        seed=args.seed,
        replicas=args.replicas,
        t_end=t_end,
        dt=args.dt,
        output_interval=args.output_interval,
        jobs=args.jobs,
    )


def _species(args: argparse.Namespace, settings: Settings, network: ReactionNetwork) -> str:
    species = args.species or settings.signalling.species
    if species not in network.species:
        raise UsageError(f"--species: {species!r} is not a species of the model")
    return species


def _signalling(
    args: argparse.Namespace, settings: Settings, network: ReactionNetwork, method: Method
) -> Tuple[str, float, float]:
    """Signalling species, fraction and total for this run."""
    species = _species(args, settings, network)
    signalling = settings.signalling
    if args.fraction is not None:
        fraction = args.fraction
    else:
        fraction = signalling.ssa_fraction if method.stochastic else signalling.ode_fraction
    if not 0 < fraction <= 1:
        raise UsageError(f"--fraction must be in (0, 1], got {fraction}")
    if args.signal_total is not None:
        total = args.signal_total
    else:
        total = plateau(network, species, signalling.pilot_t_end, signalling.pilot_dt)
        logger.info("signalling total for %s from pilot ODE plateau: %g", species, total)
    if total <= 0:
        raise UsageError(f"signalling total must be > 0, got {total}; pass --signal-total")
    return species, fraction, total


def _horizon(args: argparse.Namespace, settings: Settings, network: ReactionNetwork) -> float:
    if args.t_end != AUTO:
        return settings.simulation.t_end
    signalling = settings.signalling
    return auto_horizon(
        network,
        _species(args, settings, network),
        signalling.ode_fraction,
        signalling.horizon_factor,
        signalling.pilot_t_end,
        signalling.pilot_dt,
        total=args.signal_total,
    )


def _seeds(settings: Settings) -> List[int]:
    sim = settings.simulation
    return [sim.seed + k for k in range(sim.replicas)]


# ============================================================
# Commands
# ============================================================


def cmd_check(args: argparse.Namespace, settings: Settings) -> int:
    doc = _load(args.input, args.set)
    if doc is None:
        return EXIT_FAILURE
    logger.info(
        "%s: %d entities, %d processes, %d arcs", args.input, len(doc.entities), len(doc.processes), len(doc.arcs)
    )
    return EXIT_OK


def cmd_translate(args: argparse.Namespace, settings: Settings) -> int:
    doc = _load(args.input, args.set)
    if doc is None:
        return EXIT_FAILURE
    text = render(generate(doc))
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    findings = check_output(text)
    _report(args.out or "<stdout>", findings)
    return EXIT_OK if not findings else EXIT_FAILURE


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    doc = _load(args.input, args.set)
    if doc is None:
        return EXIT_FAILURE
    settings = _run_settings(args, settings)
    sim = settings.simulation
    method = Method(sim.method)
    network = compile_network(doc)
    prefix = args.out or Path(args.input).stem
    t_end = _horizon(args, settings, network)

    if not method.stochastic:
        trace = simulate(network, method, None, t_end, sim.output_interval, sim.dt)
        trace.to_csv(f"{prefix}.csv")
        logger.info("wrote %s.csv (%d rows)", prefix, len(trace.times))
        return EXIT_OK

    watch: List[WatchLevel] = []
    if sim.replicas > 1:
        species, fraction, total = _signalling(args, settings, network, method)
        watch = [(species, fraction * total)]
    traces = run_replicas(
        network, method, _seeds(settings), t_end, sim.output_interval, dt=sim.dt, watch=watch, jobs=sim.jobs
    )
    for trace in traces:
        trace.to_csv(f"{prefix}_seed{trace.seed}.csv")
    logger.info("wrote %d trace files with prefix %s", len(traces), prefix)
    if sim.replicas > 1:
        ensemble_stats(traces, species, fraction, total).to_csv(f"{prefix}_summary.csv")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace, settings: Settings) -> int:
    doc = _load(args.input, args.set)
    if doc is None:
        return EXIT_FAILURE
    settings = _run_settings(args, settings)
    sim = settings.simulation
    method = Method(sim.method)
    if not method.stochastic:
        raise UsageError("stats needs a stochastic method (direct or gibson-bruck)")
    if sim.replicas < 2:
        raise UsageError(f"stats needs --replicas >= 2, got {sim.replicas}")
    network = compile_network(doc)
    species, fraction, total = _signalling(args, settings, network, method)
    t_end = _horizon(args, settings, network)
    stats = ensemble_run(
        network,
        method,
        _seeds(settings),
        t_end,
        species=species,
        fraction=fraction,
        total=total,
        output_interval=sim.output_interval,
        jobs=sim.jobs,
    )
    if args.out is None:
        sys.stdout.write(stats.to_csv() or "")
    else:
        stats.to_csv(args.out)
    logger.info("signalling time mean=%s std=%s cv=%s", stats.mean, stats.std, stats.cv)
    return EXIT_OK


# ============================================================
# Argument parsing
# ============================================================


def _t_end(text: str) -> Horizon:
    if text == AUTO:
        return AUTO
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="Process flow model (.pfa)")
    common.add_argument("--config", default=None, help="Settings YAML (default: config/defaults.yaml)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    common.add_argument(
        "--set", action="append", default=[], metavar="NAME.ATTR=VALUE", help="Override an entity count or arc property"
    )

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--method", choices=METHODS, default=None)
    run.add_argument("--seed", type=int, default=None, help="First replica seed; replica k uses seed + k")
    run.add_argument("--replicas", type=int, default=None)
    run.add_argument("--t-end", type=_t_end, default=None, help="Time horizon, or 'auto' for the pilot ODE rule")
    run.add_argument("--dt", type=float, default=None, help="RK4 step (ode only)")
    run.add_argument("--output-interval", type=float, default=None)
    run.add_argument("--jobs", type=int, default=None, help="Worker processes for replicas")
    run.add_argument("--species", default=None, help="Signalling species")
    run.add_argument("--fraction", type=float, default=None, help="Signalling level as a fraction of the total")
    run.add_argument("--signal-total", type=float, default=None, help="Signalling total (default: pilot ODE plateau)")

    parser = argparse.ArgumentParser(prog="flowpepa", description="Process flow models to Bio-PEPA and simulation")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", parents=[common], help="Parse and validate a model")
    check.set_defaults(handler=cmd_check)

    translate = commands.add_parser("translate", parents=[common], help="Generate Bio-PEPA text")
    translate.add_argument("-o", "--out", default=None, help="Output file (default: stdout)")
    translate.set_defaults(handler=cmd_translate)

    sim = commands.add_parser("simulate", parents=[common, run], help="Write trace CSVs")
    sim.add_argument("-o", "--out", default=None, help="Output prefix (default: model file stem)")
    sim.set_defaults(handler=cmd_simulate)

    stats = commands.add_parser("stats", parents=[common, run], help="Signalling-time statistics over replicas")
    stats.add_argument("-o", "--out", default=None, help="Output CSV (default: stdout)")
    stats.set_defaults(handler=cmd_stats)
    return parser


def _configure_logging(settings: Settings, verbose: int) -> None:
    if verbose >= 2:
        level: Union[int, str] = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = settings.logging.level
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        settings = Settings.load(args.config)
    except (ConfigError, OSError) as exc:
        _error(str(exc))
        return EXIT_USAGE
    _configure_logging(settings, args.verbose)

    try:
        return int(args.handler(args, settings))
    except (UsageError, ConfigError, OSError) as exc:
        _error(str(exc))
        return EXIT_USAGE
    except NumericalError as exc:
        seed = f" in replica seed {exc.seed}" if exc.seed is not None else ""
        _error(f"numerical failure{seed}: {exc}")
        return EXIT_FAILURE
    except FlowPepaError as exc:
        _error(str(exc))
        return EXIT_FAILURE
