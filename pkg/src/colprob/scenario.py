"""Scenario files and the synthetic scenario generator.

Scenario files are JSON (see ``docs/scenario_schema.md``).  Covariances are
stored as their six upper-triangle entries ``xx, xy, xθ, yy, yθ, θθ``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    InvalidPolygonError,
    InvalidSpecError,
    ScenarioParseError,
    ScenarioValidationError,
)
from .geometry import Polygon2D, Pose2D
from .uncertainty import TIME_TOL, GaussianPose, GaussianTrajectory

SCHEMA_VERSION = 1
TEMPLATES = ("crossing", "head_on", "merging", "creeping", "overtake")
PSD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Agent:
    name: str
    polygon: Polygon2D
    trajectory: GaussianTrajectory


@dataclass(frozen=True, eq=False)
class Scenario:
    """Agents sharing one time grid; the first agent is the ego."""

    agents: tuple[Agent, ...]
    name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def ego(self) -> Agent:
        return self.agents[0]

    @property
    def others(self) -> tuple[Agent, ...]:
        return self.agents[1:]

    @property
    def num_steps(self) -> int:
        return len(self.ego.trajectory)


def cov_from_upper(u) -> np.ndarray:
    xx, xy, xt, yy, yt, tt = (float(v) for v in u)
    return np.array([[xx, xy, xt], [xy, yy, yt], [xt, yt, tt]])


def cov_to_upper(cov) -> list[float]:
    c = np.asarray(cov, dtype=float)
    return [float(c[0, 0]), float(c[0, 1]), float(c[0, 2]), float(c[1, 1]), float(c[1, 2]), float(c[2, 2])]


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": scenario.name,
        "meta": scenario.meta,
        "agents": [
            {
                "name": a.name,
                "polygon": a.polygon.vertices.tolist(),
                "trajectory": [
                    {"t": p.time, "mean": list(p.mean), "cov": cov_to_upper(p.cov)}
                    for p in a.trajectory.poses
                ],
            }
            for a in scenario.agents
        ],
    }


def _check_vector(value, length, path, problems) -> bool:
    if not isinstance(value, list) or len(value) != length:
        problems.append((path, f"expected a list of {length} numbers"))
        return False
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in value):
        problems.append((path, "entries must be finite numbers"))
        return False
    return True


def scenario_from_dict(data) -> Scenario:
    """Validate a parsed scenario document and build a :class:`Scenario`.

    All problems are collected before raising, each tagged with its field
    path (``agents[1].trajectory[3].cov``).
    """
    problems: list[tuple[str, str]] = []
    if not isinstance(data, dict):
        raise ScenarioValidationError([("$", "document must be a JSON object")])
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        problems.append(("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}"))
    agents_raw = data.get("agents")
    if not isinstance(agents_raw, list) or len(agents_raw) < 2:
        problems.append(("agents", "need a list of at least 2 agents"))
        raise ScenarioValidationError(problems)

    agents = []
    grid = None
    for ai, raw in enumerate(agents_raw):
        base = f"agents[{ai}]"
        if not isinstance(raw, dict):
            problems.append((base, "agent must be an object"))
            continue
        name = raw.get("name", f"agent{ai}")
        if not isinstance(name, str):
            problems.append((f"{base}.name", "must be a string"))
        poly = None
        verts = raw.get("polygon")
        if not isinstance(verts, list) or not all(_check_vector(v, 2, f"{base}.polygon", []) for v in verts):
            problems.append((f"{base}.polygon", "expected a list of [x, y] pairs"))
        else:
            try:
                poly = Polygon2D.from_vertices(verts)
            except InvalidPolygonError as exc:
                problems.append((f"{base}.polygon", str(exc)))
        steps = raw.get("trajectory")
        if not isinstance(steps, list) or not steps:
            problems.append((f"{base}.trajectory", "expected a non-empty list of steps"))
            continue
        poses = []
        for si, step in enumerate(steps):
            spath = f"{base}.trajectory[{si}]"
            if not isinstance(step, dict):
                problems.append((spath, "step must be an object"))
                continue
            t = step.get("t")
            if not isinstance(t, (int, float)) or isinstance(t, bool) or not math.isfinite(t):
                problems.append((f"{spath}.t", "must be a finite number"))
                continue
            ok = _check_vector(step.get("mean"), 3, f"{spath}.mean", problems)
            ok &= _check_vector(step.get("cov"), 6, f"{spath}.cov", problems)
            if not ok:
                continue
            cov = cov_from_upper(step["cov"])
            min_eig = float(np.linalg.eigvalsh(cov).min())
            if min_eig < -PSD_TOL:
                problems.append((f"{spath}.cov", f"not positive semi-definite (min eigenvalue {min_eig:.3e})"))
                continue
            poses.append(GaussianPose(Pose2D(*step["mean"]), cov, float(t)))
        if len(poses) != len(steps):
            continue
        times = np.array([p.time for p in poses])
        if np.any(np.diff(times) <= 0.0):
            problems.append((f"{base}.trajectory", "times must be strictly increasing"))
            continue
        if grid is None:
            grid = times
        elif len(times) != len(grid):
            problems.append((f"{base}.trajectory", f"has {len(times)} steps, agents[0] has {len(grid)}"))
            continue
        elif np.any(np.abs(times - grid) > TIME_TOL):
            problems.append((f"{base}.trajectory", "time grid differs from agents[0]"))
            continue
        if poly is not None:
            agents.append(Agent(name, poly, GaussianTrajectory(tuple(poses))))
    if problems:
        raise ScenarioValidationError(problems)
    meta = data.get("meta") or {}
    return Scenario(tuple(agents), name=str(data.get("name", "")), meta=dict(meta))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: invalid JSON: {exc}") from exc
    return scenario_from_dict(data)


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=1) + "\n")


# -- generator -------------------------------------------------------------

EGO_LENGTH, EGO_WIDTH = 4.6, 1.9
LANE_WIDTH = 3.5

FOOTPRINTS = {
    "sedan": [(-2.3, -0.95), (2.3, -0.95), (2.3, 0.95), (-2.3, 0.95)],
    # tractor cab ahead of a narrower, offset load bed
    "l_shape": [(-2.8, -1.0), (2.8, -1.0), (2.8, 1.0), (1.2, 1.0), (1.2, 0.2), (-2.8, 0.2)],
    # pickup with an open notch at the rear
    "notch": [(-2.6, -1.0), (2.4, -1.0), (2.4, 1.0), (-2.6, 1.0), (-2.6, 0.4), (-1.2, 0.4), (-1.2, -0.4), (-2.6, -0.4)],
}


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters for one synthetic two-agent scenario.

    ``offset`` is the template's free geometric parameter (timing offset in
    seconds for ``crossing``, lateral or longitudinal offset in metres for
    the others); ``None`` draws it from ``seed``.
    """

    template: str = "crossing"
    K: int = 60
    dt: float = 0.1
    base_speed: float = 8.0
    noise_growth: float = 0.02
    pos_yaw_corr: float = 0.6
    seed: int = 0
    offset: float | None = None
    footprint: str | None = None

    def validate(self) -> None:
        if self.template not in TEMPLATES:
            raise InvalidSpecError(f"unknown template {self.template!r}; expected one of {TEMPLATES}")
        if self.K < 2:
            raise InvalidSpecError("K must be at least 2")
        if not self.dt > 0.0:
            raise InvalidSpecError("dt must be positive")
        if not self.base_speed > 0.0:
            raise InvalidSpecError("base_speed must be positive")
        if self.noise_growth < 0.0:
            raise InvalidSpecError("noise_growth must be non-negative")
        if not -1.0 <= self.pos_yaw_corr <= 1.0:
            raise InvalidSpecError("pos_yaw_corr must lie in [-1, 1]")
        if self.footprint is not None and self.footprint not in FOOTPRINTS:
            raise InvalidSpecError(f"unknown footprint {self.footprint!r}")


def _pose_covs(rng, spec: GeneratorSpec, heading: float) -> np.ndarray:
    """Covariances for one agent, built in the agent's initial body frame."""
    jitter = rng.uniform(0.7, 1.3, size=3)
    var0 = np.array([0.3, 0.2, 0.03]) ** 2 * jitter
    growth = spec.noise_growth * np.array([1.0, 0.5, 0.01]) * jitter
    c, s = math.cos(heading), math.sin(heading)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    covs = np.empty((spec.K, 3, 3))
    for k in range(spec.K):
        along, cross, yaw = var0 + k * growth
        body = np.diag([along, cross, yaw])
        body[1, 2] = body[2, 1] = spec.pos_yaw_corr * math.sqrt(cross * yaw)
        covs[k] = rot @ body @ rot.T
    if spec.pos_yaw_corr == 0.0:
        covs[:, :2, 2] = covs[:, 2, :2] = 0.0
    return covs


def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u)


def _other_path(spec: GeneratorSpec, t: np.ndarray, t_mid: float, offset: float):
    v = spec.base_speed
    zeros = np.zeros_like(t)
    if spec.template == "crossing":
        y = v * (t - t_mid - offset)
        return zeros, y, zeros + math.pi / 2
    if spec.template == "head_on":
        return -v * (t - t_mid), zeros + offset, zeros + math.pi
    if spec.template == "merging":
        # slides from the adjacent lane into the ego lane around t_mid
        span = max(t[-1], 1e-9)
        u = (t - t_mid) / span + 0.5
        blend, dblend = _smoothstep(u)
        y = LANE_WIDTH * (1.0 - blend)
        vy = -LANE_WIDTH * dblend / span
        vx = 0.9 * v
        x = vx * (t - t_mid) + offset
        return x, y, np.arctan2(vy, vx)
    if spec.template == "creeping":
        vc = 0.15 * v
        return zeros, offset + vc * (t - t_mid), zeros + math.pi / 2
    # overtake
    return 1.5 * v * (t - t_mid), zeros + offset, zeros


def _draw_offset(rng, spec: GeneratorSpec) -> float:
    if spec.template == "crossing":
        return float(rng.uniform(-1.0, 1.0) * (EGO_LENGTH + 2.0) / spec.base_speed)
    if spec.template == "head_on":
        return float(rng.uniform(0.5, 3.5))
    if spec.template == "merging":
        return float(rng.uniform(-8.0, 8.0))
    if spec.template == "creeping":
        return float(rng.uniform(-4.5, -1.5))
    return float(rng.uniform(1.5, 3.5))


def _trajectory(times, x, y, theta, covs) -> GaussianTrajectory:
    return GaussianTrajectory(
        tuple(
            GaussianPose(Pose2D(float(x[k]), float(y[k]), float(theta[k])), covs[k], float(times[k]))
            for k in range(len(times))
        )
    )


def generate(spec: GeneratorSpec) -> Scenario:
    """Deterministic two-agent scenario for ``spec``.

    The ego drives along +x through the origin, reaching it at the middle of
    the horizon; the other agent follows the template's closed-form path.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    times = np.round(np.arange(spec.K) * spec.dt, 12)
    t_mid = 0.5 * (spec.K - 1) * spec.dt
    offset = _draw_offset(rng, spec)
    if spec.offset is not None:
        offset = float(spec.offset)
    footprint = spec.footprint or str(rng.choice(sorted(FOOTPRINTS)))

    ego_x = spec.base_speed * (times - t_mid)
    zeros = np.zeros_like(times)
    ego = Agent(
        "ego",
        Polygon2D.rectangle(EGO_LENGTH, EGO_WIDTH),
        _trajectory(times, ego_x, zeros, zeros, _pose_covs(rng, spec, 0.0)),
    )
    ox, oy, oth = _other_path(spec, times, t_mid, offset)
    other = Agent(
        "other",
        Polygon2D.from_vertices(FOOTPRINTS[footprint]),
        _trajectory(times, ox, oy, oth, _pose_covs(rng, spec, float(oth[0]))),
    )
    meta = {k: v for k, v in asdict(spec).items()}
    meta.update(offset=offset, footprint=footprint)
    name = f"{spec.template}_s{spec.seed}"
    return Scenario((ego, other), name=name, meta=meta)


def suite_specs(n: int, seed: int = 0, K: int = 60, dt: float = 0.1) -> list[GeneratorSpec]:
    """``n`` varied generator specs cycling through every template."""
    rng = np.random.default_rng(seed)
    specs = []
    for i in range(n):
        specs.append(
            GeneratorSpec(
                template=TEMPLATES[i % len(TEMPLATES)],
                K=K,
                dt=dt,
                base_speed=float(rng.uniform(5.0, 12.0)),
                noise_growth=float(rng.uniform(0.005, 0.04)),
                # kinematic predictions couple heading and lateral position strongly
                pos_yaw_corr=float(rng.choice([-1.0, 1.0]) * rng.uniform(0.6, 0.95)),
                seed=int(rng.integers(0, 2**31 - 1)),
            )
        )
    return specs


def generate_suite(n: int, seed: int = 0, K: int = 60, dt: float = 0.1) -> list[Scenario]:
    return [generate(s) for s in suite_specs(n, seed, K, dt)]
