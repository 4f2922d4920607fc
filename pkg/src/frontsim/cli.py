"""Command-line entry point: run scenarios, write CSV/JSON/SVG artifacts.

Exit codes: 0 success, 1 configuration error, 2 degenerate initial data,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .kinetics import FlowConvergenceError
from .state import H2Violation
from .classical import StepFailure
from .weak import (
    GlueMismatch,
    SurgeryH2Failure,
    WeakSolution,
    events_as_json,
    ill_posedness_demo,
    run_weak,
)
from .oracle import DomainTooSmall, FHNBlowUp, InterfaceCountMismatch, eps_sweep
from .config import (
    ConfigError,
    PRESETS,
    RunConfig,
    load_config_file,
    preset_config,
)
from .render import spacetime_svg, weak_solution_curves

_NUMERICAL_ERRORS = (
    StepFailure,
    FlowConvergenceError,
    SurgeryH2Failure,
    GlueMismatch,
    FHNBlowUp,
    DomainTooSmall,
    InterfaceCountMismatch,
    RuntimeError,
)

_EPILOG = """\
presets: expanding, shrinking, merge, illposed

config file format (INI; non-preset values):
  [parameters] g1 g2 g3 g4 a b [m=auto]
  [initial]    intervals = x1 x2 [x3 x4 ...]
               profile = constant|samples, profile_value, profile_samples,
               profile_file, profile_span
  [run]        t_end [tol_step=1e-8] [tol_event=1e-10] [eta=auto]
  [output]     [dir=out] [trajectory_samples=401] [field_x="xmin xmax n"] [field_t=21]
  [oracle]     [eps = 0.05 0.02 ...] [sample_dt=0.02]

environment overrides: FRONTSIM_<SECTION>__<KEY>=value, e.g.
  FRONTSIM_RUN__TOL_STEP=1e-9 frontsim run config.ini
"""


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".17g")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _trajectories_csv(w: WeakSolution, t_end: float, n_samples: int, labels) -> str:
    lines = ["t," + ",".join(f"x_{lab}" for lab in labels)]
    times = np.linspace(0.0, t_end, n_samples)
    for t in times:
        seg = w.segment_at(float(t))
        pos = dict(zip(seg.labels, np.atleast_1d(seg.positions(float(t)))))
        row = [_fmt(t)] + [_fmt(pos.get(lab, math.nan)) for lab in labels]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _field_csv(value_at, xs, ts) -> str:
    lines = ["t,x,v"]
    for t in ts:
        vs = np.atleast_1d(np.asarray(value_at(xs, float(t))))
        for x, v in zip(xs, vs):
            lines.append(f"{_fmt(t)},{_fmt(x)},{_fmt(v)}")
    return "\n".join(lines) + "\n"


def _field_grid(cfg: RunConfig):
    if cfg.field_x is not None:
        lo, hi, n = cfg.field_x
    else:
        speed = cfg.params.a + cfg.params.b * max(1.0, cfg.profile.bound)
        pairs = cfg.omega.pairs
        lo = min(l for l, _ in pairs) - speed * cfg.t_end - 1.0
        hi = max(r for _, r in pairs) + speed * cfg.t_end + 1.0
        n = 101
    return np.linspace(lo, hi, int(n))


def _run_standard(cfg: RunConfig, out_dir: str) -> None:
    w = run_weak(
        cfg.params,
        cfg.omega,
        cfg.profile,
        cfg.t_end,
        tol_step=cfg.tol_step,
        tol_event=cfg.tol_event,
        margin=cfg.eta,
    )
    labels = tuple(range(1, len(cfg.omega.endpoints) + 1))
    _write_text(
        os.path.join(out_dir, "trajectories.csv"),
        _trajectories_csv(w, cfg.t_end, cfg.trajectory_samples, labels),
    )
    xs = _field_grid(cfg)
    ts = np.linspace(0.0, cfg.t_end, cfg.field_t)
    _write_text(os.path.join(out_dir, "field.csv"), _field_csv(w.evaluate_v, xs, ts))
    _write_text(os.path.join(out_dir, "events.json"), events_as_json(w))

    curves, polygons = weak_solution_curves(w)
    svg = spacetime_svg(
        curves,
        polygons,
        x_range=(float(xs[0]), float(xs[-1])),
        t_range=(0.0, cfg.t_end),
        title=cfg.scenario or "front-tracking run",
    )
    _write_text(os.path.join(out_dir, "spacetime.svg"), svg)

    if cfg.oracle_eps:
        oracle_dir = os.path.join(out_dir, "oracle")
        os.makedirs(oracle_dir, exist_ok=True)
        reports = eps_sweep(
            cfg.params,
            cfg.omega,
            cfg.profile,
            w,
            cfg.oracle_eps,
            cfg.t_end,
            sample_dt=cfg.oracle_sample_dt,
        )
        summary = []
        for report in reports:
            summary.append(
                {
                    "eps": report.eps,
                    "sup_abs_error": report.sup_abs,
                    "sup_rel_error": report.sup_rel,
                    "samples": int(report.times.size),
                    "skipped_samples": report.skipped_times,
                }
            )
            lines = ["t,error"]
            for t, e in zip(report.times, report.abs_errors):
                lines.append(f"{_fmt(t)},{_fmt(e)}")
            _write_text(
                os.path.join(oracle_dir, f"errors_eps_{report.eps:g}.csv"),
                "\n".join(lines) + "\n",
            )
        _write_text(
            os.path.join(oracle_dir, "summary.json"),
            json.dumps(summary, sort_keys=True, indent=2) + "\n",
        )


def _run_illposed(cfg: RunConfig, out_dir: str) -> None:
    front, back = ill_posedness_demo(cfg.params, cfg.t_end)
    times = np.linspace(0.0, cfg.t_end, cfg.trajectory_samples)
    lines = ["t,x_1,x_2"]
    for t in times:
        lines.append(f"{_fmt(t)},{_fmt(front.position(float(t)))},{_fmt(back.position(float(t)))}")
    _write_text(os.path.join(out_dir, "trajectories.csv"), "\n".join(lines) + "\n")

    div = ["t,separation"]
    for t in times:
        sep = back.position(float(t)) - front.position(float(t))
        div.append(f"{_fmt(t)},{_fmt(sep)}")
    _write_text(os.path.join(out_dir, "divergence.csv"), "\n".join(div) + "\n")

    xs = _field_grid(cfg)
    ts = np.linspace(0.0, cfg.t_end, cfg.field_t)
    _write_text(os.path.join(out_dir, "field.csv"), _field_csv(front.v, xs, ts))
    _write_text(os.path.join(out_dir, "events.json"), json.dumps([]) + "\n")

    curves = [
        (1, np.column_stack([np.array([front.position(float(t)) for t in times]), times])),
        (2, np.column_stack([np.array([back.position(float(t)) for t in times]), times])),
    ]
    svg = spacetime_svg(
        curves,
        [],
        x_range=(float(xs[0]), float(xs[-1])),
        t_range=(0.0, cfg.t_end),
        title="illposed: two continuations from degenerate data",
    )
    _write_text(os.path.join(out_dir, "spacetime.svg"), svg)


def run_scenario(cfg: RunConfig) -> None:
    """Execute one configuration and write its artifacts under cfg.out_dir."""
    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    if cfg.scenario == "illposed":
        _run_illposed(cfg, out_dir)
    else:
        _run_standard(cfg, out_dir)


def _parse_oracle_arg(raw: str) -> tuple[float, ...]:
    if not raw.startswith("eps="):
        raise ConfigError([f"--oracle expects eps=<comma-list>, got {raw!r}"])
    try:
        values = tuple(float(tok) for tok in raw[4:].split(",") if tok)
    except ValueError:
        raise ConfigError([f"--oracle has non-numeric eps in {raw!r}"]) from None
    if not values or any(v <= 0 for v in values):
        raise ConfigError([f"--oracle needs positive eps values, got {raw!r}"])
    return values


def _sweep(args) -> int:
    configs = sorted(
        f for f in os.listdir(args.sweep) if f.endswith(".ini")
    )
    if not configs:
        print(f"no .ini configs in {args.sweep}", file=sys.stderr)
        return 1
    base_out = args.out or "out"

    def one(name: str) -> int:
        path = os.path.join(args.sweep, name)
        try:
            cfg = load_config_file(path)
        except ConfigError as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            return 1
        cfg.out_dir = os.path.join(base_out, os.path.splitext(name)[0])
        return _dispatch(cfg, name)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        codes = list(pool.map(one, configs))
    return max(codes)


def _dispatch(cfg: RunConfig, what: str) -> int:
    try:
        run_scenario(cfg)
    except H2Violation as exc:
        print(f"{what}: degenerate initial data: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"{what}: numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="frontsim",
        description="Front-tracking simulator for 1-D excitable media",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser(
        "run",
        help="run one config, preset, or a sweep directory",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run_p.add_argument("config", nargs="?", help="INI config file")
    run_p.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")
    run_p.add_argument("--out", help="output directory (overrides config)")
    run_p.add_argument("--oracle", metavar="eps=LIST", help="cross-validate, e.g. eps=0.05,0.02")
    run_p.add_argument("--sweep", metavar="DIR", help="run every .ini in DIR concurrently")
    run_p.add_argument("--jobs", type=int, default=4, help="sweep worker threads")

    args = parser.parse_args(argv)

    try:
        if args.sweep:
            if args.config or args.preset:
                raise ConfigError(["--sweep excludes a config file or --preset"])
            return _sweep(args)
        if args.preset and args.config:
            raise ConfigError(["give either a config file or --preset, not both"])
        if args.preset:
            cfg = preset_config(args.preset, out_dir=args.out or "out")
        elif args.config:
            cfg = load_config_file(args.config)
            if args.out:
                cfg.out_dir = args.out
        else:
            raise ConfigError(["nothing to run: give a config file, --preset, or --sweep"])
        if args.oracle:
            cfg.oracle_eps = _parse_oracle_arg(args.oracle)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return 1

    return _dispatch(cfg, cfg.scenario or args.config or "run")


if __name__ == "__main__":
    sys.exit(main())
