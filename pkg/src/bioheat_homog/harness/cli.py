"""Command line entry point: ``bioheat-homog <verb> --config FILE --out DIR``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..geometry import GeometryError
from ..numerics import SolverError
from .config import ConfigError, RunConfig, dumps_config, load_config
from .output import study_json, write_json, write_study_csv, write_trajectory
from .pipeline import run_cell_report, run_convergence_study, run_macro, run_micro
from .plots import emit_plots

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("bioheat_homog")


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_text(dumps_config(cfg))
    return out


def cmd_cell_report(args, cfg: RunConfig) -> None:
    out = _out_dir(args, cfg)
    report, res = run_cell_report(cfg)
    if "json" in cfg.formats:
        write_json(report, out / "cell_report.json")
    if "svg" in cfg.formats:
        emit_plots(None, res.kernel, out)
    print(json.dumps({k: report[k] for k in ("A_eff", "gamma_eff", "vol_Y1")}))


def cmd_micro_run(args, cfg: RunConfig) -> None:
    out = _out_dir(args, cfg)
    eps = cfg.micro_epsilon if cfg.micro_epsilon is not None else cfg.epsilons()[0]
    traj = run_micro(cfg, eps)
    from ..micro_solver import energy_norms

    en = energy_norms(traj.U, traj.grid, traj.timegrid)
    write_trajectory(traj.timegrid.times, traj.U, traj.grid.shape, out / "micro_trajectory",
                     fmt=cfg.trajectory_format, stride=cfg.trajectory_stride,
                     extra={"phase": traj.grid.mask}, value_name="U")
    if "json" in cfg.formats:
        write_json({"epsilon": eps, "energy_H": en.sup_H, "energy_V": en.int_V}, out / "micro_energy.json")


def cmd_macro_run(args, cfg: RunConfig) -> None:
    out = _out_dir(args, cfg)
    res = run_macro(cfg)
    tr = res.trajectory
    shape = (res.M,) * cfg.cell_dim
    write_trajectory(tr.timegrid.times, tr.T, shape, out / "macro_trajectory",
                     fmt=cfg.trajectory_format, stride=cfg.trajectory_stride, value_name="T")
    write_trajectory(tr.timegrid.times, res.blood_mean, shape, out / "macro_blood_mean",
                     fmt=cfg.trajectory_format, stride=cfg.trajectory_stride, value_name="Tb_mean")


def cmd_study(args, cfg: RunConfig) -> None:
    out = _out_dir(args, cfg)
    report = run_convergence_study(cfg)
    if "csv" in cfg.formats:
        write_study_csv(report, out / "study.csv")
    if "json" in cfg.formats:
        write_json(study_json(report), out / "study.json")
    if "svg" in cfg.formats:
        emit_plots(report, report.kernel, out)
    for r in report.rows:
        print(f"eps={r.epsilon:g}  e_tissue={r.e_tissue:.4e}  e_blood={r.e_blood:.4e}")


COMMANDS = {
    "cell-report": cmd_cell_report,
    "micro-run": cmd_micro_run,
    "macro-run": cmd_macro_run,
    "study": cmd_study,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bioheat-homog", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--out", help="output directory (overrides output.out_dir)")
        p.add_argument("--flag", action="append", default=[], metavar="KEY=VALUE",
                       help="override one configuration key; repeatable")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.flag)
    except (ConfigError, GeometryError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        COMMANDS[args.command](args, cfg)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (GeometryError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
