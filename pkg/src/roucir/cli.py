"""``rou-cir-lab`` command line.

Commands::

    rou-cir-lab simulate SCHEME [--config FILE] [--out DIR] [--seed N] [--dt X] [--horizon T]
    rou-cir-lab figure1 [--out DIR] [--hurst LIST] [--eps LIST] ...
    rou-cir-lab figure2 [--out DIR] [--hurst H] [--eps LIST] ...
    rou-cir-lab verify SUITE

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 domain precondition error.
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .convergence import FIGURE2_EPSILONS, epsilon_ladder
from .errors import RouCirError
from .io import ConfigError, RunConfig, read_config, write_csv, write_manifest, write_sample_path, write_scheme_output
from .models import ModelParams, SubcriticalWarning, validate
from .noise import RngSeed, TimeGrid, check_hurst, generate_bm_increments, generate_fbm_increments
from .plotting import Series, write_svg
from .reflection import epsilon_integral_reflection
from .schemes import (
    euler_cir_full_truncation,
    ou_squared_sum,
    simulate_ou,
    simulate_rou_projected,
    simulate_sqrt_process,
)
from .verification import SUITES, base_params, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3
SCHEME_NAMES = ("cir-euler", "sqrt-implicit", "rou-projected", "ou", "ou-squared-sum")
FIGURE1_HURST = (0.6, 0.7, 0.8, 0.9)
FIGURE1_EPSILON = 1e-4
FIGURE2_HURST = 0.6
FIGURE2_COLORS = ("red", "orange", "green", "blue", "purple")


class UsageError(Exception):
    pass


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _run_config(args) -> RunConfig:
    cfg = read_config(args.config) if args.config else RunConfig()
    horizon = args.horizon if args.horizon is not None else cfg.horizon
    n_steps = cfg.n_steps
    if args.dt is not None:
        try:
            n_steps = TimeGrid.from_dt(horizon, args.dt).n_steps
        except ValueError as exc:
            raise ConfigError(str(exc), key="dt") from None
    elif args.horizon is not None:
        n_steps = max(1, round(horizon / cfg.grid.dt))
    params = cfg.params
    try:
        if args.hurst:
            params = params.replace(hurst=args.hurst[0])
        if args.eps:
            params = params.replace(epsilon=args.eps[0])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    seed = args.seed if args.seed is not None else cfg.seed
    return RunConfig(params, horizon, n_steps, seed, cfg.replications)


def _noise(grid, hurst, seed):
    if hurst == 0.5:
        return generate_bm_increments(grid, seed)
    return generate_fbm_increments(grid, hurst, seed)


def _manifest_head(cfg: RunConfig, command: str, started: float):
    return cfg.items() + [
        ("run.command", command),
        ("run.version", __version__),
        ("run.dt", repr(cfg.grid.dt)),
    ]


def _finish_manifest(out: Path, items, artifacts, notes, started):
    items = list(items)
    for i, note in enumerate(dict.fromkeys(notes)):
        items.append((f"run.warning.{i}", note))
    for i, name in enumerate(artifacts):
        items.append((f"run.artifact.{i}", name))
    items.append(("run.wall_time", f"{time.perf_counter() - started:.3f}"))
    write_manifest(out / "manifest.txt", items)


def _validated(params, allow_zero_b, notes):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SubcriticalWarning)
        v = validate(params, allow_zero_mean_reversion=allow_zero_b)
    notes.extend(v.warnings)
    return v


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    if args.scheme not in SCHEME_NAMES:
        raise UsageError(f"unknown scheme {args.scheme!r}; valid schemes: {', '.join(SCHEME_NAMES)}")
    cfg = _run_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    p, grid = cfg.params, cfg.grid
    notes: list[str] = []
    _validated(p, args.scheme in ("ou", "ou-squared-sum", "rou-projected"), notes)
    d = None
    if args.scheme == "ou-squared-sum":
        d = p.d
        if d != int(d) or d < 1:
            raise ValueError(f"ou-squared-sum needs an integer dimension 4a/sigma^2 >= 1, got {d}")
        d = int(d)
    artifacts = []
    for r in range(cfg.replications):
        name = "path.csv" if cfg.replications == 1 else f"path_{r:04d}.csv"
        if args.scheme == "ou-squared-sum":
            noises = [_noise(grid, p.hurst, RngSeed(cfg.seed, r * d + i)) for i in range(d)]
            for nz in noises:
                notes.extend(nz.notes)
            write_sample_path(out / name, ou_squared_sum(d, p, noises))
        else:
            nz = _noise(grid, p.hurst, RngSeed(cfg.seed, r))
            notes.extend(nz.notes)
            if args.scheme == "rou-projected":
                res = simulate_rou_projected(p, nz)
                write_scheme_output(out / name, res.path, res.reflection)
            else:
                run = {
                    "cir-euler": euler_cir_full_truncation,
                    "sqrt-implicit": simulate_sqrt_process,
                    "ou": simulate_ou,
                }[args.scheme]
                path = run(p, nz)
                if args.scheme == "sqrt-implicit":
                    zeros = int(np.count_nonzero(path.values == 0.0))
                    if zeros:
                        notes.append(f"sqrt-implicit path {name} has {zeros} exact zeros (c = 0)")
                write_sample_path(out / name, path)
        artifacts.append(name)
    items = _manifest_head(cfg, "simulate", started) + [("run.scheme", args.scheme)]
    if d is not None:
        items.append(("run.dimension", str(d)))
    _finish_manifest(out, items, artifacts, notes, started)
    print(f"wrote {len(artifacts)} path file(s) and manifest.txt to {out}")
    return EXIT_OK


def _hurst_list(values, default):
    hs = list(values) if values else list(default)
    for h in hs:
        try:
            check_hurst(h)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return hs


def cmd_figure1(args) -> int:
    started = time.perf_counter()
    hs = _hurst_list(args.hurst, FIGURE1_HURST)
    eps = args.eps[0] if args.eps else FIGURE1_EPSILON
    cfg = _run_config(argparse.Namespace(**{**vars(args), "hurst": None, "eps": None}))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid, notes, artifacts = cfg.grid, [], []
    for h in hs:
        p = base_params(h, y0=cfg.params.y0, b=cfg.params.b, sigma=cfg.params.sigma, epsilon=eps)
        _validated(p, False, notes)
        nz = _noise(grid, h, RngSeed(cfg.seed))
        notes.extend(nz.notes)
        y = simulate_sqrt_process(p, nz)
        L = epsilon_integral_reflection(y, eps)
        stem = f"figure1_H{h:g}"
        write_csv(out / f"{stem}.csv", "t,Y,L_epsilon_integral", [grid.times, y.values, L.values])
        write_svg(out / f"{stem}.svg", [
            Series(grid.times, y.values, "black", 1.0, "Y_eps"),
            Series(grid.times, L.values, "red", 1.5, "(1/2) int eps/Y_eps ds"),
        ], title=f"H = {h:g}, eps = {eps:g}")
        artifacts += [f"{stem}.csv", f"{stem}.svg"]
    items = _manifest_head(RunConfig(cfg.params.replace(epsilon=eps), cfg.horizon, cfg.n_steps, cfg.seed, 1), "figure1", started)
    items.append(("run.hurst_list", ",".join(f"{h:g}" for h in hs)))
    items.append(("run.scheme", "sqrt-implicit"))
    _finish_manifest(out, items, artifacts, notes, started)
    print(f"wrote {len(artifacts)} files and manifest.txt to {out}")
    return EXIT_OK


def cmd_figure2(args) -> int:
    started = time.perf_counter()
    h = _hurst_list(args.hurst, (FIGURE2_HURST,))[0]
    epsilons = list(args.eps) if args.eps else list(FIGURE2_EPSILONS)
    cfg = _run_config(argparse.Namespace(**{**vars(args), "hurst": None, "eps": None}))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid
    p = base_params(h, y0=cfg.params.y0, b=cfg.params.b, sigma=cfg.params.sigma)
    notes: list[str] = []
    _validated(p, False, notes)
    nz = _noise(grid, h, RngSeed(cfg.seed))
    notes.extend(nz.notes)
    rep = epsilon_ladder(p, epsilons, nz, seeds=(cfg.seed,), keep_paths=True)
    t, dt = grid.times, grid.dt
    artifacts, series = [], []
    colors = FIGURE2_COLORS + ("gray",) * max(0, len(epsilons) - len(FIGURE2_COLORS))
    for eps, color in zip(rep.epsilons, colors):
        y, L = rep.paths[float(eps)]
        name = f"figure2_eps{eps:g}_seed{cfg.seed}_dt{dt:g}.csv"
        write_csv(out / name, "t,Y,L_epsilon_integral", [t, y.values, L.values])
        artifacts.append(name)
        series.append(Series(t, y.values, color, 1.0, f"eps = {eps:g}"))
    ref = rep.paths["reference"]
    name = f"figure2_reference_seed{cfg.seed}_dt{dt:g}.csv"
    write_scheme_output(out / name, ref.path, ref.reflection)
    artifacts.append(name)
    series.append(Series(t, ref.path.values, "black", 2.5, "reflected OU"))
    write_svg(out / "figure2.svg", series, title=f"H = {h:g}")
    artifacts.append("figure2.svg")
    items = _manifest_head(RunConfig(p, cfg.horizon, cfg.n_steps, cfg.seed, 1), "figure2", started)
    items.append(("run.scheme", "sqrt-implicit,rou-projected"))
    items += rep.manifest_items()
    _finish_manifest(out, items, artifacts, notes, started)
    first, last = float(rep.sup_gap_Y[0]), float(rep.sup_gap_Y[-1])
    print(f"ladder ordering: {str(rep.monotone_Y).lower()}")
    print(f"sup gap Y: eps={rep.epsilons[0]:g} -> {first:.4g}, eps={rep.epsilons[-1]:g} -> {last:.4g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; valid suites: {', '.join(SUITES)}")
    results = run_suite(args.suite)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value parameter file")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--hurst", type=_float_list, help="comma-separated Hurst indices")
    common.add_argument("--eps", type=_float_list, help="comma-separated perturbations")
    common.add_argument("--dt", type=float, help="time step")
    common.add_argument("--horizon", type=float, help="time horizon T")

    parser = argparse.ArgumentParser(prog="rou-cir-lab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", parents=[common], help="simulate one scheme")
    sim.add_argument("scheme", help="one of: " + ", ".join(SCHEME_NAMES))
    sim.set_defaults(func=cmd_simulate)
    f1 = sub.add_parser("figure1", parents=[common], help="square-root paths and eps-integrals per H")
    f1.set_defaults(func=cmd_figure1)
    f2 = sub.add_parser("figure2", parents=[common], help="eps ladder against the reflected path")
    f2.set_defaults(func=cmd_figure2)
    ver = sub.add_parser("verify", help="run an acceptance suite")
    ver.add_argument("suite", help="one of: " + ", ".join(SUITES))
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RouCirError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
