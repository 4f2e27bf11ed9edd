"""
Command-line surface.

    python -m app run    --config config/desk.yaml --selection.strategy simclust --selection.G 4
    python -m app sweep  --config config/desk.yaml --sweep.G "[2, 4]"
    python -m app dp-ari --dp.seeds "[0, 1, 2]"
    python -m app bench  --bench.L "[50, 100]"
    python -m app report --rounds-csv results/sweep/rounds.csv
    python -m app serve  --port 8000

Every config key can be overridden with a flag of the same dotted name.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from app.core.config import load_run_config, settings
from app.core.exceptions import SimulationError
from app.core.logger import logger
from app.models.run_model import RunConfig
from app.services import experiment_service, report_service
from app.utils.file_handler import save_dataframe, save_json
from app.utils.helpers import parse_dotted_flags

COMMANDS = {
    "run": "Run the configured strategy for every seed",
    "sweep": "Run every strategy x G x gamma x seed combination",
    "dp-ari": "Clustering ARI versus privacy level gamma",
    "bench": "Clustering cost scaling over L and rho",
    "report": "Re-summarise an existing per-round CSV",
    "serve": "Start the HTTP API",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fl-energy", description=settings.APP_DESC)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in COMMANDS.items():
        p = sub.add_parser(name, help=text, allow_abbrev=False)
        p.add_argument("--config", default=settings.DEFAULT_CONFIG, help="YAML experiment config")
        p.add_argument("--out", default=None, help="Output directory (default: OUTPUT_DIR/<command>)")
        if name == "report":
            p.add_argument("--rounds-csv", required=True, help="Per-round CSV written by run or sweep")
        if name == "serve":
            p.add_argument("--host", default="127.0.0.1")
            p.add_argument("--port", type=int, default=8000)
    return parser


def _out_dir(args) -> Path:
    return Path(args.out) if args.out else Path(settings.OUTPUT_DIR) / args.command


def cmd_run(cfg: RunConfig, out_dir: Path):
    results = experiment_service.run_all_seeds(cfg)
    return report_service.emit_report(results, out_dir, cfg.report)


def cmd_sweep(cfg: RunConfig, out_dir: Path):
    results = experiment_service.run_sweep(cfg)
    if not results:
        raise SimulationError("Sweep produced no feasible runs")
    return report_service.emit_report(results, out_dir, cfg.report)


def cmd_dp_ari(cfg: RunConfig, out_dir: Path):
    sel = cfg.selection
    df = experiment_service.dp_ari_sweep(cfg.dp, sel.search_width, sel.max_iters, sel.lam)
    written = report_service.write_ari_report(df, out_dir)

    top = max(cfg.dp.gammas)
    at_top = df[df["gamma"] == top].groupby("method")["ari"].mean()
    logger.info(
        f"ARI at gamma={top:g}: simclust={at_top.get('simclust', float('nan')):.3f} "
        f"repclust={at_top.get('repclust', float('nan')):.3f}",
        extra={"gamma": top, "difference": float(at_top.get("repclust", 0.0) - at_top.get("simclust", 0.0))},
    )
    return written


def cmd_bench(cfg: RunConfig, out_dir: Path):
    df = experiment_service.scaling_bench(cfg.bench, cfg.selection.search_width, cfg.selection.lam)
    return {"bench": save_dataframe(df, out_dir / "bench.csv")}


def cmd_report(cfg: RunConfig, out_dir: Path, rounds_csv: str):
    df = report_service.load_rounds(Path(rounds_csv))
    summary = report_service.summarize_rounds(
        df, cfg.report.accuracy_targets, cfg.report.sustain_window, cfg.report.baseline
    )
    return {"summary": save_json(summary, out_dir / "summary.json")}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)

    try:
        overrides = parse_dotted_flags(extra)
        cfg = load_run_config(args.config, overrides)
        if args.command == "serve":
            import uvicorn

            uvicorn.run("app.main:app", host=args.host, port=args.port)
            return 0

        out_dir = _out_dir(args)
        if args.command == "run":
            written = cmd_run(cfg, out_dir)
        elif args.command == "sweep":
            written = cmd_sweep(cfg, out_dir)
        elif args.command == "dp-ari":
            written = cmd_dp_ari(cfg, out_dir)
        elif args.command == "bench":
            written = cmd_bench(cfg, out_dir)
        else:
            written = cmd_report(cfg, out_dir, args.rounds_csv)
    except SimulationError as e:
        logger.error(f"{args.command} failed: {e}", extra={"error": type(e).__name__})
        return 2

    for kind, path in written.items():
        logger.info(f"Wrote {kind}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
