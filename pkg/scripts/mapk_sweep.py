"""
Signalling-time ensembles of the MAPK cascade across input enzyme levels.

    python scripts/mapk_sweep.py --e1 19 20 21 50 100 --replicas 20 --jobs 4

For every E1 count the model is re-run with `m_E1.count` overridden; the
horizon comes from a pilot ODE run and the signalling total is the ODE
plateau of the output species (or --total). One summary row per E1.
"""

import argparse
import logging
from pathlib import Path

import pandas as pd

from flowpepa.ensemble import Method, auto_horizon, ensemble_run, plateau
from flowpepa.model import is_valid, validate
from flowpepa.network import compile_network
from flowpepa.overrides import apply_overrides
from flowpepa.parser import parse_file
from flowpepa.settings import Settings

ROOT = Path(__file__).resolve().parents[1]
MODEL = ROOT / "models" / "mapk.pfa"

logger = logging.getLogger("mapk_sweep")


def sweep_row(doc, e1: int, settings: Settings, method: Method, replicas: int, total, jobs: int) -> dict:
    network = compile_network(apply_overrides(doc, [f"m_E1.count={e1}"]))
    signalling = settings.signalling
    species = signalling.species
    if total is None:
        total = plateau(network, species, signalling.pilot_t_end, signalling.pilot_dt)
    horizon = auto_horizon(
        network,
        species,
        signalling.ode_fraction,
        signalling.horizon_factor,
        signalling.pilot_t_end,
        signalling.pilot_dt,
        total=total,
    )
    seeds = [settings.simulation.seed + k for k in range(replicas)]
    stats = ensemble_run(
        network,
        method,
        seeds,
        horizon,
        species=species,
        fraction=signalling.ssa_fraction,
        total=total,
        output_interval=settings.simulation.output_interval,
        jobs=jobs,
    )
    return {
        "E1": e1,
        "total": total,
        "horizon": horizon,
        "reached": len(stats.reached),
        "mean": stats.mean,
        "std": stats.std,
        "cv": stats.cv,
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--model", default=str(MODEL), help="MAPK model (.pfa)")
    parser.add_argument("--e1", type=int, nargs="+", default=[19, 20, 21, 50, 100], help="E1 counts to sweep")
    parser.add_argument("--replicas", type=int, default=20)
    parser.add_argument("--method", choices=["direct", "gibson-bruck"], default="gibson-bruck")
    parser.add_argument("--total", type=float, default=None, help="Signalling total (default: ODE plateau per E1)")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--config", default=None)
    parser.add_argument("--out", default=None, help="Also write the table as CSV")
    args = parser.parse_args()

    settings = Settings.load(args.config)
    logging.basicConfig(level=settings.logging.level, format="%(levelname)s %(name)s: %(message)s")

    result = parse_file(args.model)
    if result.document is None or not is_valid(validate(result.document)):
        raise SystemExit(f"{args.model}: model does not validate; run `flowpepa check` for details")

    rows = []
    for e1 in args.e1:
        logger.info("E1=%d: %d replicas", e1, args.replicas)
        rows.append(sweep_row(result.document, e1, settings, Method(args.method), args.replicas, args.total, args.jobs))

    table = pd.DataFrame(rows)
    print(table.to_string(index=False, na_rep="NA"))
    if args.out:
        table.to_csv(args.out, index=False, na_rep="NA")


if __name__ == "__main__":
    main()
