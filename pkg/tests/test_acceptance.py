"""Acceptance criteria, one test each, with one PASS/FAIL line per criterion."""

import math
import time

import mpmath
import numpy as np
import pytest
from shapely.geometry import Polygon as ShapelyPolygon

from colprob.bench import evaluate, ground_truth, summarize
from colprob.checker import CheckerConfig, check_pair
from colprob.cli import resolve_scenario
from colprob.geometry import collision_indicator, polygons_intersect
from colprob.linalg import sqrt_sym3, std_normal_cdf
from colprob.scenario import Agent, Scenario, generate, generate_suite, suite_specs
from colprob.sigma import SigmaTree1D, gauss_hermite_set, unscented_set
from colprob.uncertainty import GaussianPose, GaussianTrajectory
from oracles import random_convex, random_star, raster_overlap, sat_gap

SUITE_SIZE = 200
SUITE_SEED = 0
GT_N = 100_000
GT_SEED = 12345
GRID_SIGMA = (3.0, 3.4, 3.8, 4.2)
GRID_W_MIN = (0.001, 0.005, 0.01, 0.02)
GRID_P_MAX = tuple(range(0, 9))


def _report(capsys, number, title, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    assert ok, f"criterion {number} ({title}) failed: {detail}"


@pytest.fixture(scope="module")
def suite():
    return generate_suite(SUITE_SIZE, seed=SUITE_SEED)


@pytest.fixture(scope="module")
def suite_report(suite):
    return evaluate(suite, CheckerConfig(), gt_n=GT_N, seed=GT_SEED, repeats=3)


@pytest.mark.slow
def test_01_oracle_accuracy(capsys, suite_report):
    err = suite_report.error_summary()
    n = suite_report.n_error_records
    ok = n >= 50 and not suite_report.failures and err["median"] <= 0.06 and err["p95"] <= 0.15
    detail = (f"{n} scenarios with p_gt > 0, median {err['median']:.4f} (<= 0.06), "
              f"P95 {err['p95']:.4f} (<= 0.15), mean {err['mean']:.4f}, P99 {err['p99']:.4f}")
    _report(capsys, 1, "oracle accuracy", ok, detail)


@pytest.mark.slow
def test_02_latency(capsys, suite_report):
    rt = summarize(r.runtime * 1e3 for r in suite_report.records)
    detail = ", ".join(f"{k} {v:.3f} ms" for k, v in rt.items()) + \
        f", max {max(r.runtime for r in suite_report.records) * 1e3:.3f} ms (median <= 1.0 ms, K=60)"
    _report(capsys, 2, "latency", rt["median"] <= 1.0, detail)


def test_03_baseline_sample_counts(capsys):
    n_ut, n_gh = len(unscented_set()), len(gauss_hermite_set(8))
    _report(capsys, 3, "baseline sample counts", n_ut == 7 and n_gh == 512,
            f"unscented {n_ut} (7), gauss_hermite(8) {n_gh} (512)")


def _grid_trees():
    return [SigmaTree1D(s, w, p) for s in GRID_SIGMA for w in GRID_W_MIN for p in GRID_P_MAX]


def test_04_conservation(capsys):
    start = time.perf_counter()
    worst, cuts = 0.0, 0
    for tree in _grid_trees():
        for p in range(int(tree.order.max()) + 1):
            worst = max(worst, abs(tree.weight[tree.cut(p)].sum() + tree.tail_mass - 1.0))
            cuts += 1
    elapsed = time.perf_counter() - start
    _report(capsys, 4, "conservation", worst <= 1e-10 and elapsed < 1.0,
            f"{cuts} cuts over {len(GRID_SIGMA) * len(GRID_W_MIN) * len(GRID_P_MAX)} trees, "
            f"max |sum + tail - 1| {worst:.2e} (<= 1e-10), {elapsed:.3f} s (< 1 s)")


def test_05_child_sum_identity(capsys):
    worst, nodes = 0.0, 0
    for tree in _grid_trees():
        parents = np.flatnonzero(tree.child >= 0)
        c = tree.child[parents]
        diff = np.abs(tree.weight[parents] - tree.weight[c] - tree.weight[c + 1])
        worst = max(worst, float(diff.max(initial=0.0)))
        nodes += len(parents)
    _report(capsys, 5, "child-sum identity", worst <= 1e-12,
            f"{nodes} unhalted nodes, max |w - w_lo - w_hi| {worst:.2e} (<= 1e-12)")


@pytest.mark.slow
def test_06_monotonic_curve(capsys):
    rng = np.random.default_rng(606)
    schemes = ("adaptive", "unscented", "gauss_hermite", "monte_carlo")
    violations = checked = 0
    for spec in suite_specs(1000, seed=6):
        cfg = CheckerConfig(
            sigma_max=float(rng.choice(GRID_SIGMA)),
            w_min=float(rng.choice(GRID_W_MIN)),
            d_max=float(rng.choice((0.8, 1.2, 1.625, 2.4))),
            scheme=str(rng.choice(schemes)),
            gh_degree=int(rng.integers(2, 9)),
            mc_n=500,
            mc_seed=int(rng.integers(0, 2**31)),
        )
        sc = generate(spec)
        curve = check_pair(sc.ego, sc.others[0], cfg).p_collision_curve
        violations += int(np.sum(np.diff(curve) < 0.0))
        violations += int(np.sum((curve < 0.0) | (curve > 1.0)))
        checked += 1
    _report(capsys, 6, "monotonic curve", violations == 0 and checked == 1000,
            f"{checked} randomized scenarios/configs, {violations} violations (0)")


@pytest.mark.slow
def test_07_prefilter_soundness(capsys, suite):
    worst, pairs, skips = 0.0, 0, 0
    for cfg in (CheckerConfig(), CheckerConfig(scheme="unscented"),
                CheckerConfig(scheme="gauss_hermite"), CheckerConfig(scheme="monte_carlo")):
        off = CheckerConfig(**{**cfg.__dict__, "prefilters_enabled": False})
        for sc in suite:
            on_res = check_pair(sc.ego, sc.others[0], cfg)
            off_res = check_pair(sc.ego, sc.others[0], off)
            worst = max(worst, abs(on_res.p_collision_final - off_res.p_collision_final))
            skips += on_res.prefilter_skips
            pairs += 1
    _report(capsys, 7, "prefilter soundness", worst <= 1e-12,
            f"{pairs} scheme/scenario pairs, {skips} timesteps skipped, max |on - off| {worst:.2e} (<= 1e-12)")


@pytest.mark.slow
def test_08_geometry_oracle(capsys):
    rng = np.random.default_rng(808)
    convex_checked = convex_bad = near = 0
    while convex_checked < 10_000:
        pa = random_convex(rng)
        pb = random_convex(rng) + rng.uniform(-2.5, 2.5, 2)
        gap = sat_gap(pa, pb)
        if abs(gap) < 1e-9:
            near += 1
            continue
        convex_bad += polygons_intersect(pa, pb) != (gap < 0)
        convex_checked += 1
    raster_checked = raster_bad = skipped = 0
    while raster_checked < 1000:
        pa = random_star(rng)
        pb = random_star(rng) + rng.uniform(-0.8, 0.8, 2)
        sa, sb = ShapelyPolygon(pa), ShapelyPolygon(pb)
        inter = sa.intersection(sb)
        if sa.distance(sb) < 5e-3 and (inter.is_empty or inter.buffer(-5e-3).is_empty):
            skipped += 1
            continue
        raster_bad += polygons_intersect(pa, pb) != raster_overlap(pa, pb)
        raster_checked += 1
    ok = convex_bad == 0 and raster_bad == 0
    _report(capsys, 8, "geometry oracle", ok,
            f"SAT {convex_checked - convex_bad}/{convex_checked} agree ({near} near-tangent excluded), "
            f"raster {raster_checked - raster_bad}/{raster_checked} agree ({skipped} within 5 mm margin excluded)")


def test_09_linear_algebra(capsys):
    rng = np.random.default_rng(909)
    worst_sqrt = 0.0
    for i in range(10_000):
        a = rng.normal(size=(3, 3))
        if i % 4 == 0:
            a[:, rng.integers(3)] = 0.0  # rank-deficient PSD
        m = a @ a.T
        s = sqrt_sym3(m)
        worst_sqrt = max(worst_sqrt, float(np.abs(s @ s - m).max()))
    zs = np.linspace(-10.0, 10.0, 1000)
    with mpmath.workdps(50):
        worst_cdf = max(abs(std_normal_cdf(float(z)) - float(mpmath.ncdf(float(z)))) for z in zs)
    _report(capsys, 9, "linear algebra", worst_sqrt <= 1e-9 and worst_cdf <= 1e-12,
            f"sqrt_sym3 max reconstruction error {worst_sqrt:.2e} over 10^4 (<= 1e-9), "
            f"std_normal_cdf max error {worst_cdf:.2e} over 10^3 points (<= 1e-12)")


def test_10_monte_carlo_convergence(capsys):
    sc = resolve_scenario("grazing")
    parts, ok = [], True
    for seed in (1, 2, 3):
        (lo,) = ground_truth(sc, n=1000, seed=seed)
        (hi,) = ground_truth(sc, n=100_000, seed=1000 + seed)
        bound = 4.0 * math.sqrt(hi.p * (1.0 - hi.p)) * (1.0 / math.sqrt(1e3) + 1.0 / math.sqrt(1e5))
        diff = abs(lo.p - hi.p)
        ok &= diff <= bound and 0.0 < hi.p < 1.0
        parts.append(f"seed {seed}: |{lo.p:.4f} - {hi.p:.4f}| = {diff:.4f} <= {bound:.4f}")
    _report(capsys, 10, "Monte Carlo convergence", ok, "; ".join(parts))


def _zero_cov(agent):
    poses = tuple(GaussianPose(p.mean, np.zeros((3, 3)), p.time) for p in agent.trajectory.poses)
    return Agent(agent.name, agent.polygon, GaussianTrajectory(poses))


def test_11_degenerate_determinism(capsys, suite):
    configs = (CheckerConfig(), CheckerConfig(scheme="unscented"),
               CheckerConfig(scheme="gauss_hermite"), CheckerConfig(scheme="monte_carlo", mc_n=500))
    mismatches, ones = 0, 0
    for sc in suite:
        det = Scenario((_zero_cov(sc.ego), _zero_cov(sc.others[0])), name=sc.name)
        ego, other = det.ego, det.others[0]
        hit = [
            collision_indicator(ego.polygon, other.polygon, np.subtract(a.mean, b.mean), b.mean) == 0
            for a, b in zip(ego.trajectory.poses, other.trajectory.poses)
        ]
        expected = np.maximum.accumulate(np.array(hit, dtype=float))
        ones += expected[-1] == 1.0
        for cfg in configs:
            mismatches += not np.array_equal(check_pair(ego, other, cfg).p_collision_curve, expected)
    _report(capsys, 11, "degenerate determinism", mismatches == 0,
            f"{len(suite)} zero-covariance scenarios x {len(configs)} schemes, {mismatches} curve mismatches (0); "
            f"{ones} end in collision, {len(suite) - ones} collision-free")
