"""Command-line interface: ``colprob {check,curve,gen,bench,grid}``.

Exit status is 0 on success, 1 for bad input and 2 when a result breaks an
internal invariant.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import bench
from .checker import CheckerConfig, CollisionResult, check_pair
from .errors import ColprobError
from .scenario import (
    TEMPLATES,
    GeneratorSpec,
    generate,
    generate_suite,
    load_scenario,
    save_scenario,
    scenario_to_dict,
)

log = logging.getLogger("colprob")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2
CURVE_SCHEMES = ("adaptive", "unscented", "gauss_hermite", "monte_carlo")


class InvariantViolation(RuntimeError):
    pass


def bundled_scenarios() -> list[str]:
    root = resources.files("colprob") / "data" / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_scenario(name_or_path: str):
    path = Path(name_or_path)
    if path.exists():
        return load_scenario(path)
    if name_or_path in bundled_scenarios():
        ref = resources.files("colprob") / "data" / "scenarios" / f"{name_or_path}.json"
        with resources.as_file(ref) as p:
            return load_scenario(p)
    raise ColprobError(f"no scenario file or bundled scenario named {name_or_path!r}")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_config_args(p: argparse.ArgumentParser, scheme: bool = True) -> None:
    g = p.add_argument_group("checker")
    if scheme:
        g.add_argument("--scheme", choices=CURVE_SCHEMES, default="adaptive")
    g.add_argument("--sigma-max", type=float, default=3.8)
    g.add_argument("--w-min", type=float, default=0.01)
    g.add_argument("--d-max", type=float, default=1.625)
    g.add_argument("--p-max", type=int, default=4)
    g.add_argument("--gh-degree", type=int, default=8)
    g.add_argument("--mc-n", type=int, default=2000)
    g.add_argument("--kappa", type=float, default=1.0)
    g.add_argument("--no-prefilters", action="store_true")
    g.add_argument("--literal-spacing", action="store_true", help="compare raw variance / 2^p against d_max")
    p.add_argument("--seed", type=int, default=0, help="seed for every random draw")


def _config(args, **overrides) -> CheckerConfig:
    return CheckerConfig(
        sigma_max=args.sigma_max,
        w_min=args.w_min,
        d_max=args.d_max,
        p_max=args.p_max,
        scheme=overrides.pop("scheme", getattr(args, "scheme", "adaptive")),
        gh_degree=args.gh_degree,
        mc_n=args.mc_n,
        mc_seed=args.seed,
        kappa=args.kappa,
        prefilters_enabled=not args.no_prefilters,
        literal_spacing_rule=args.literal_spacing,
        **overrides,
    )


def _verify(result: CollisionResult) -> None:
    curve = result.p_collision_curve
    if np.any(np.diff(curve) < 0.0) or np.any((curve < 0.0) | (curve > 1.0)):
        raise InvariantViolation("collision curve is not a non-decreasing probability sequence")


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_check(args) -> int:
    scenario = resolve_scenario(args.scenario)
    cfg = _config(args)
    results = []
    for other in scenario.others:
        result = check_pair(scenario.ego, other, cfg)
        _verify(result)
        results.append((other.name, result))
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["ego", "other", "p_collision"])
    for name, r in results:
        out.writerow([scenario.ego.name, name, f"{r.p_collision_final:.6f}"])
    if args.curve:
        times = scenario.ego.trajectory.times
        with _output(args.curve) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["other", "step", "t", "p_collision"])
            for name, r in results:
                for k, p in enumerate(r.p_collision_curve):
                    w.writerow([name, k, f"{times[k]:.6f}", f"{p:.10f}"])
    return EXIT_OK


def cmd_curve(args) -> int:
    scenario = resolve_scenario(args.scenario)
    other = scenario.others[args.pair]
    curves = {}
    for scheme in CURVE_SCHEMES:
        result = check_pair(scenario.ego, other, _config(args, scheme=scheme))
        _verify(result)
        curves[scheme] = result.p_collision_curve
    times = scenario.ego.trajectory.times
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "t", *CURVE_SCHEMES])
        for k, t in enumerate(times):
            w.writerow([k, f"{t:.6f}", *(f"{curves[s][k]:.10f}" for s in CURVE_SCHEMES)])
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.suite:
        out_dir = Path(args.out or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, sc in enumerate(generate_suite(args.suite, args.seed, args.K, args.dt)):
            save_scenario(sc, out_dir / f"{i:04d}_{sc.name}.json")
        log.info("wrote %d scenarios to %s", args.suite, out_dir)
        return EXIT_OK
    spec = GeneratorSpec(
        template=args.template,
        K=args.K,
        dt=args.dt,
        base_speed=args.speed,
        noise_growth=args.noise_growth,
        pos_yaw_corr=args.pos_yaw_corr,
        seed=args.seed,
        offset=args.offset,
        footprint=args.footprint,
    )
    sc = generate(spec)
    if args.out in (None, "-"):
        json.dump(scenario_to_dict(sc), sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        save_scenario(sc, args.out)
    return EXIT_OK


def _scenarios_for(args):
    if args.scenario_dir:
        d = Path(args.scenario_dir)
        if not d.is_dir():
            raise ColprobError(f"{d} is not a directory")
        files = sorted(d.glob("*.json"))
        if not files:
            raise ColprobError(f"no scenario files (*.json) in {d}")
        return [load_scenario(f) for f in files]
    return generate_suite(args.suite, args.seed, args.K, args.dt)


def _add_suite_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenarios")
    g.add_argument("--scenario-dir", help="directory of scenario JSON files")
    g.add_argument("--suite", type=int, default=50, help="generated suite size when no directory is given")
    g.add_argument("--K", type=int, default=60)
    g.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--gt-n", type=int, default=bench.DEFAULT_GT_N)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out-dir", default=".")


def cmd_bench(args) -> int:
    scenarios = _scenarios_for(args)
    cfg = _config(args)
    report = bench.evaluate(scenarios, cfg, args.gt_n, args.seed, args.repeats)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "records.csv", "w", newline="") as fh:
        bench.write_records_csv(report.records, fh)
    with open(out / "summary.csv", "w", newline="") as fh:
        bench.write_summary_csv(report, fh)
    bench.write_summary_csv(report, sys.stdout)
    if args.dense_gap:
        dense = replace(cfg, initial_orders=(cfg.p_max, cfg.p_max))
        with open(out / "dense_gap.csv", "w", newline="") as fh:
            _write_gap(bench.paired_gap(scenarios, cfg, dense), fh, "p_dense")
        with open(out / "anchor_gap.csv", "w", newline="") as fh:
            _write_gap(bench.paired_gap(scenarios, cfg, swap=True), fh, "p_swapped")
    for name, msg in report.failures:
        log.warning("scenario %s failed: %s", name, msg)
    return EXIT_OK


def _write_gap(rows, fh, alt_name) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["scenario_id", "p_est", alt_name, "abs_diff"])
    for pid, p, q, d in rows:
        w.writerow([pid, f"{p:.10f}", f"{q:.10f}", f"{d:.10f}"])


def cmd_grid(args) -> int:
    scenarios = _scenarios_for(args)
    grid = bench.GridSpec(args.sigma_max_values, args.w_min_values, args.d_max_values, args.repeats)
    rows = bench.grid_search(scenarios, grid, args.gt_n, args.seed, _config(args, scheme="adaptive"))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "grid.csv", "w", newline="") as fh:
        bench.write_grid_csv(rows, fh)
    bench.write_grid_csv(rows, sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colprob", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="collision probability for each ego-other pair")
    p.add_argument("--scenario", required=True, help="scenario file or bundled scenario name")
    p.add_argument("--curve", help="write the per-timestep cumulative curve as CSV ('-' for stdout)")
    _add_config_args(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("curve", help="per-timestep curves for every scheme")
    p.add_argument("--scenario", required=True)
    p.add_argument("--pair", type=int, default=0, help="index of the non-ego agent")
    p.add_argument("--out", default="-")
    _add_config_args(p, scheme=False)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("gen", help="generate synthetic scenarios")
    p.add_argument("--template", choices=TEMPLATES, default="crossing")
    p.add_argument("--K", type=int, default=60)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--speed", type=float, default=8.0)
    p.add_argument("--noise-growth", type=float, default=0.02)
    p.add_argument("--pos-yaw-corr", type=float, default=0.6)
    p.add_argument("--offset", type=float)
    p.add_argument("--footprint")
    p.add_argument("--suite", type=int, default=0, help="write a varied suite of this size instead")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (directory with --suite)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="accuracy/latency against Monte Carlo")
    _add_suite_args(p)
    p.add_argument("--dense-gap", action="store_true", help="also report dense-order and anchor-swap gaps")
    _add_config_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("grid", help="grid search over sigma_max, w_min, d_max")
    _add_suite_args(p)
    p.add_argument("--sigma-max-values", type=_floats, default=bench.GridSpec.sigma_max)
    p.add_argument("--w-min-values", type=_floats, default=bench.GridSpec.w_min)
    p.add_argument("--d-max-values", type=_floats, default=bench.GridSpec.d_max)
    _add_config_args(p, scheme=False)
    p.set_defaults(func=cmd_grid)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"colprob: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ColprobError, OSError) as exc:
        print(f"colprob: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
