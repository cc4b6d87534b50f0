"""Command-line driver: run a preset or config file and write plot-ready data.

Output layout under ``--out``::

    config.json         full configuration echo
    norms.csv           t, dt, sup_u, sup_v, l2_u, l2_v, h1_u, h1_v, bkm_integral
    snapshots/NN.csv    x, u, v at each snapshot threshold (index.json lists them)
    profiles/NN.csv     xi, U, V in self-similar variables (index.json lists them)
    fit.json            blow-up fit, lambda estimate and BKM report
    certificate.json    blow-up and regularity certificates of the initial data

Exit status: 0 on a clean stop, 2 if the solution became non-finite, 3 on
I/O errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import analysis, theory
from .config import PRESETS, RunConfig, build_initial_condition, get_preset
from .grid import SolutionState
from .integrator import RunResult, StopReason, run
from .io import write_json, write_norms_csv, write_table

log = logging.getLogger(__name__)

EXIT_OK, EXIT_NON_FINITE, EXIT_IO = 0, 2, 3


def execute(config: RunConfig) -> tuple[SolutionState, RunResult]:
    initial = build_initial_condition(config)
    result = run(initial, config.model, config.policy, config.stop,
                 config.snapshot_thresholds, record_every=config.record_every)
    return initial, result


def _certificates(initial: SolutionState) -> dict:
    grid = initial.grid
    if grid.support is None:
        return {"blowup": None, "regularity": None,
                "note": "grid has no support interval"}
    kind = theory.PERIODIC_KIND if grid.is_periodic else theory.LINE_KIND
    out = {}
    try:
        out["blowup"] = theory.blowup_certificate(initial.u, initial.v, kind).to_dict()
    except ValueError as exc:
        out["blowup"] = {"error": str(exc)}
    out["clm"] = theory.blowup_certificate(initial.u, initial.v, theory.CLM_KIND).to_dict()
    out["regularity"] = theory.check_global_regularity(initial.u, initial.v).to_dict()
    return out


def analyze(config: RunConfig, result: RunResult) -> tuple[dict, list]:
    """Fit, profiles, lambda and BKM report; failures are recorded, not raised."""
    report: dict = {"stop_reason": result.stop_reason.value,
                    "steps": result.steps_taken, "t_final": result.final.t}
    frames = []
    try:
        fit = analysis.fit_blowup(result, config.fit_window)
    except ValueError as exc:
        report["fit"] = None
        report["fit_error"] = str(exc)
        fit = None
    else:
        report["fit"] = fit.to_dict()
    if fit is not None:
        for snap in result.snapshots:
            try:
                frames.append(analysis.extract_profile(
                    snap, fit, config.profile_xi_max, config.profile_points,
                    model=config.model))
            except ValueError as exc:
                log.warning("profile at t=%s skipped: %s", snap.t, exc)
        if len(frames) >= 3:
            period = result.final.grid.extent if result.final.grid.is_periodic else None
            lam = analysis.estimate_lambda(frames, period=period)
            report["lambda"] = {"value": lam.value, "spread": lam.spread,
                                "samples": list(lam.samples)}
    bkm = analysis.bkm_monitor(result)
    report["bkm"] = {"integral": bkm.total, "growth_rate": bkm.growth_rate,
                     "classification": bkm.classification,
                     "T_fit": bkm.T_fit, "tail_residual": bkm.tail_residual}
    return report, frames


def write_outputs(out: Path, config: RunConfig, initial: SolutionState,
                  result: RunResult, report: dict, frames: list) -> None:
    echo = config.to_dict()
    write_json(out / "config.json", echo)
    write_norms_csv(out / "norms.csv", result.norm_history)
    index = []
    x = result.final.grid.points
    for i, snap in enumerate(result.snapshots):
        name = f"{i:02d}.csv"
        write_table(out / "snapshots" / name, ("x", "u", "v"),
                    (x, snap.u.values, snap.v.values))
        index.append({"file": name, "t": snap.t, **snap.meta})
    write_json(out / "snapshots" / "index.json", index)
    index = []
    for i, frame in enumerate(frames):
        name = f"{i:02d}.csv"
        write_table(out / "profiles" / name, ("xi", "U", "V"), (frame.xi, frame.U, frame.V))
        index.append({"file": name, "t": frame.t, "T": frame.T, "x0": frame.x0,
                      "length_scale": frame.length_scale, "lambda_est": frame.lambda_est})
    write_json(out / "profiles" / "index.json", index)
    write_json(out / "fit.json", {**report, "config": echo})
    write_json(out / "certificate.json", {**_certificates(initial), "config": echo})


def run_config(config: RunConfig, out: str | Path | None = None) -> dict:
    """Run, analyze and (if an output directory is known) write everything."""
    initial, result = execute(config)
    report, frames = analyze(config, result)
    target = out if out is not None else config.output_dir
    if target is not None:
        write_outputs(Path(target), config, initial, result, report, frames)
    return report


def run_preset(name: str, out: str | Path | None = None, **overrides) -> dict:
    return run_config(get_preset(name).with_overrides(**overrides), out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonlocal-blowup", description=__doc__.split("\n")[0])
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS), help="named experiment")
    src.add_argument("--config", type=Path, help="JSON config (same schema as config.json)")
    p.add_argument("--list-presets", action="store_true", help="print preset names and exit")
    p.add_argument("--n", type=int, help="grid points")
    p.add_argument("--nu", type=float, help="viscosity")
    p.add_argument("--alpha", type=float, help="coefficient of u v")
    p.add_argument("--stop-sup", type=float, help="stop once |u|_inf reaches this")
    p.add_argument("--stop-time", type=float, help="stop at this time")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.list_presets:
        print("\n".join(sorted(PRESETS)))
        return EXIT_OK
    try:
        if args.config is not None:
            from .io import read_json
            config = RunConfig.from_dict(read_json(args.config))
        elif args.preset is not None:
            config = get_preset(args.preset)
        else:
            print("one of --preset or --config is required", file=sys.stderr)
            return 1
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    config = config.with_overrides(n=args.n, nu=args.nu, alpha=args.alpha,
                                   stop_sup=args.stop_sup, stop_time=args.stop_time,
                                   output_dir=None if args.out is None else str(args.out))
    out = config.output_dir or f"runs/{config.name}"
    try:
        report = run_config(config, out)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    fit = report.get("fit")
    if fit:
        print(f"T = {fit['T']:.15g}  C = {fit['C']:.15g}  residual = {fit['residual']:.3g}")
    else:
        print(f"no fit: {report.get('fit_error')}")
    print(f"stop: {report['stop_reason']} at t = {report['t_final']:.15g}; "
          f"BKM {report['bkm']['classification']}; output in {out}")
    if report["stop_reason"] == StopReason.NON_FINITE.value:
        return EXIT_NON_FINITE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
