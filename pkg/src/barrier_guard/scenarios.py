"""Scenario files: schema, validation, and packing for the simulator.

A scenario bundles the plant, the barrier list (ellipsoid shells with
controller gains), the nominal controller, the input box, initial states and
integration settings. Files are JSON with a versioned ``schema`` field; see
data/obstacle_field.json for the shipped obstacle field.
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, List, Optional, Tuple

import numpy as np

from .barrier_core import AlphaFn, BarrierSpec, InputBox
from .geometry import AnnulusShell, Ellipsoid, annuli_disjoint, eval_c
from .kernels import BarrierArrays
from .plants import (
    UnicycleBarrierGains,
    aicardi_gain_bounds,
    aicardi_nominal,
    eta,
    unicycle_barrier,
    unicycle_gain_synthesis,
)

SCHEMA_VERSION = 1
MAX_DT = 0.05


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class BarrierConfig:
    shell: AnnulusShell
    gains: UnicycleBarrierGains
    alpha: AlphaFn


@dataclass(frozen=True)
class Scenario:
    name: str
    plant: str
    box: InputBox
    barriers: Tuple[BarrierConfig, ...]
    nominal: dict
    initial_states: np.ndarray
    robustness_states: np.ndarray
    dt: float
    horizon: float
    seed: int
    steps_per_second: float = 60.0
    teleop_dt: Optional[float] = None

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def n_barriers(self) -> int:
        return len(self.barriers)

    def pack(self) -> BarrierArrays:
        shells = [b.shell for b in self.barriers]
        return BarrierArrays(
            gammas=np.array([s.ellipsoid.gamma for s in shells], dtype=float),
            deltas2=np.array([s.ellipsoid.delta**2 for s in shells]),
            Ps=np.array([s.ellipsoid.P for s in shells]),
            centers=np.array([s.ellipsoid.center for s in shells]),
            a=np.array([s.a for s in shells]),
            b=np.array([s.b for s in shells]),
            kp=np.array([b.gains.k_p for b in self.barriers]),
            kd=np.array([b.gains.k_d for b in self.barriers]),
            alpha=np.array([b.alpha.gain for b in self.barriers]),
        )

    def barrier_specs(self) -> List[BarrierSpec]:
        return [unicycle_barrier(b.shell, b.gains, b.alpha) for b in self.barriers]

    def nominal_gains(self) -> Tuple[float, float]:
        if self.nominal.get("type") == "aicardi":
            return float(self.nominal["k_r"]), float(self.nominal["k_a"])
        return 0.0, 0.0

    def nominal_fn(self) -> Callable[[np.ndarray], np.ndarray]:
        kind = self.nominal.get("type")
        if kind == "aicardi":
            k_r, k_a = self.nominal_gains()
            return lambda x: aicardi_nominal(x, k_r, k_a)
        if kind == "zero":
            return lambda x: np.zeros(2)
        raise ScenarioError(f"unknown nominal controller type {kind!r}")


def _parse_barrier(entry: dict, box: InputBox, index: int) -> BarrierConfig:
    try:
        ell = Ellipsoid(
            gamma=int(entry["gamma"]),
            delta=float(entry["delta"]),
            P=np.asarray(entry["P"], dtype=float),
            center=np.asarray(entry["center"], dtype=float),
        )
        shell = AnnulusShell(ellipsoid=ell, a=float(entry["a"]), b=float(entry["b"]))
    except (KeyError, ValueError) as exc:
        raise ScenarioError(f"barrier {index}: {exc}") from exc
    if "k_p" in entry or "k_d" in entry:
        try:
            gains = UnicycleBarrierGains(k_p=float(entry["k_p"]), k_d=float(entry["k_d"]))
        except KeyError as exc:
            raise ScenarioError(f"barrier {index}: k_p and k_d must be given together") from exc
    else:
        gains = unicycle_gain_synthesis(shell, box)
    alpha = AlphaFn(gain=float(entry.get("alpha_gain", 1.0)))
    return BarrierConfig(shell=shell, gains=gains, alpha=alpha)


def scenario_from_dict(data: dict) -> Scenario:
    if data.get("schema") != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema {data.get('schema')!r}, expected {SCHEMA_VERSION}")
    plant = data.get("plant", "unicycle")
    if plant != "unicycle":
        raise ScenarioError(f"unsupported plant {plant!r}")
    boxdata = data["input_box"]
    if "lower" in boxdata:
        box = InputBox(lower=np.asarray(boxdata["lower"], float), upper=np.asarray(boxdata["upper"], float))
    else:
        box = InputBox.symmetric(np.asarray(boxdata["upper"], float))
    barriers = tuple(
        _parse_barrier(entry, box, i) for i, entry in enumerate(data["barriers"])
    )
    initial = np.asarray(data.get("initial_states", []), dtype=float).reshape(-1, 3)
    robust = np.asarray(data.get("robustness_states", []), dtype=float).reshape(-1, 3)
    dt = float(data["dt"])
    return Scenario(
        name=str(data.get("name", "unnamed")),
        plant=plant,
        box=box,
        barriers=barriers,
        nominal=dict(data["nominal"]),
        initial_states=initial,
        robustness_states=robust,
        dt=dt,
        horizon=float(data["horizon"]),
        seed=int(data.get("seed", 0)),
        steps_per_second=float(data.get("steps_per_second", 60.0)),
        teleop_dt=float(data["teleop_dt"]) if "teleop_dt" in data else None,
    )


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "name": s.name,
        "plant": s.plant,
        "input_box": {"lower": s.box.lower.tolist(), "upper": s.box.upper.tolist()},
        "nominal": s.nominal,
        "dt": s.dt,
        "horizon": s.horizon,
        "seed": s.seed,
        "steps_per_second": s.steps_per_second,
        **({"teleop_dt": s.teleop_dt} if s.teleop_dt is not None else {}),
        "barriers": [
            {
                "gamma": b.shell.ellipsoid.gamma,
                "delta": b.shell.ellipsoid.delta,
                "P": b.shell.ellipsoid.P.tolist(),
                "center": b.shell.ellipsoid.center.tolist(),
                "a": b.shell.a,
                "b": b.shell.b,
                "alpha_gain": b.alpha.gain,
                "k_p": b.gains.k_p,
                "k_d": b.gains.k_d,
            }
            for b in s.barriers
        ],
        "initial_states": s.initial_states.tolist(),
        "robustness_states": s.robustness_states.tolist(),
    }


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(path, s: Scenario):
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(s), fh, indent=1)
        fh.write("\n")


def shipped_scenario_path() -> str:
    return str(resources.files("barrier_guard").joinpath("data/obstacle_field.json"))


def load_shipped_scenario() -> Scenario:
    return load_scenario(shipped_scenario_path())


def synthetic_ring_scenario(n_barriers: int, u_max: float = 2.0) -> Scenario:
    """N obstacle ellipses on a ring, for scaling and benchmark sweeps.

    The ring radius grows with N so the annuli stay pairwise disjoint by
    construction.
    """
    box = InputBox.symmetric([u_max, u_max])
    ring = max(6.0, n_barriers * 1.2)
    configs = []
    for k in range(n_barriers):
        th = 2.0 * np.pi * k / n_barriers
        ell = Ellipsoid.from_semiaxes(
            -1, (1.0, 0.8), th, (ring * np.cos(th), ring * np.sin(th))
        )
        shell = AnnulusShell(ellipsoid=ell, a=0.5, b=0.5)
        configs.append(BarrierConfig(shell, unicycle_gain_synthesis(shell, box), AlphaFn(1.0)))
    return Scenario(
        name=f"ring_{n_barriers}",
        plant="unicycle",
        box=box,
        barriers=tuple(configs),
        nominal={"type": "zero"},
        initial_states=np.array([[0.0, 0.0, 0.0]]),
        robustness_states=np.zeros((0, 3)),
        dt=1e-3,
        horizon=1.0,
        seed=0,
    )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    issues: Tuple[ValidationIssue, ...] = ()
    min_disjoint_margin: Optional[float] = None

    @property
    def passed(self) -> bool:
        return not self.issues


def validate_scenario(s: Scenario, resolution: int = 256) -> ValidationReport:
    """Semantic checks beyond parsing: disjointness, gain bounds, state classes.

    Disjointness is verified pairwise on a deterministic polar grid; the
    runtime membership check in the controller remains the backstop along
    trajectories.
    """
    issues: List[ValidationIssue] = []

    if not 0.0 < s.dt <= MAX_DT:
        issues.append(ValidationIssue("dt", f"dt must be in (0, {MAX_DT}], got {s.dt}"))
    if s.teleop_dt is not None and not 0.0 < s.teleop_dt <= MAX_DT:
        issues.append(
            ValidationIssue("teleop_dt", f"teleop_dt must be in (0, {MAX_DT}], got {s.teleop_dt}")
        )
    if s.horizon <= 0:
        issues.append(ValidationIssue("horizon", f"horizon must be positive, got {s.horizon}"))

    min_margin = None
    for i in range(s.n_barriers):
        for j in range(i + 1, s.n_barriers):
            rep = annuli_disjoint(s.barriers[i].shell, s.barriers[j].shell, resolution)
            if min_margin is None or rep.margin < min_margin:
                min_margin = rep.margin
            if not rep.disjoint:
                issues.append(
                    ValidationIssue(
                        "disjointness",
                        f"annuli of barriers {i} and {j} intersect "
                        f"(margin {rep.margin:.3g} at {rep.offending_point})",
                    )
                )

    for i, bar in enumerate(s.barriers):
        limits = unicycle_gain_synthesis(bar.shell, s.box)
        tol = 1e-9
        if bar.gains.k_p > limits.k_p * (1 + tol):
            issues.append(
                ValidationIssue(
                    "gain_kp",
                    f"barrier {i}: k_p={bar.gains.k_p:.6g} exceeds max admissible "
                    f"{limits.k_p:.6g} (eta={eta(bar.shell):.6g})",
                )
            )
        if bar.gains.k_d > limits.k_d * (1 + tol):
            issues.append(
                ValidationIssue(
                    "gain_kd",
                    f"barrier {i}: k_d={bar.gains.k_d:.6g} exceeds max admissible {limits.k_d:.6g}",
                )
            )

    def h_all(x):
        return np.array([eval_c(b.shell.ellipsoid, x[:2]) for b in s.barriers])

    for k, x0 in enumerate(s.initial_states):
        h = h_all(x0)
        if np.any(h < 0):
            bad = np.nonzero(h < 0)[0].tolist()
            issues.append(
                ValidationIssue(
                    "initial_state",
                    f"initial state {k} violates barriers {bad} (h={h[bad]}); "
                    "move it or flag it as a robustness state",
                )
            )

    for k, x0 in enumerate(s.robustness_states):
        h = h_all(x0)
        violated = np.nonzero(h < 0)[0]
        if violated.size != 1:
            issues.append(
                ValidationIssue(
                    "robustness_state",
                    f"robustness state {k} must violate exactly one barrier, violates "
                    f"{violated.tolist()}",
                )
            )
            continue
        i = int(violated[0])
        if h[i] < -s.barriers[i].shell.b:
            issues.append(
                ValidationIssue(
                    "robustness_state",
                    f"robustness state {k} is below the annulus of barrier {i} "
                    f"(h={h[i]:.6g} < -b={-s.barriers[i].shell.b})",
                )
            )

    if s.nominal.get("type") == "aicardi":
        k_r, k_a = s.nominal_gains()
        all_states = np.vstack([s.initial_states.reshape(-1, 3), s.robustness_states.reshape(-1, 3)])
        if all_states.size:
            r0 = float(np.hypot(all_states[:, 0], all_states[:, 1]).max())
            k_r_max, _ = aicardi_gain_bounds(r0, s.box)
            k_a_max = (s.box.upper[1] - k_r * 1.5 * np.pi) / (2.0 * np.pi)
            if k_r > k_r_max * (1 + 1e-9):
                issues.append(
                    ValidationIssue(
                        "nominal_gains",
                        f"k_r={k_r:.6g} exceeds bound {k_r_max:.6g} for r(0)={r0:.6g}",
                    )
                )
            if k_a > k_a_max * (1 + 1e-9):
                issues.append(
                    ValidationIssue(
                        "nominal_gains",
                        f"k_a={k_a:.6g} exceeds bound {k_a_max:.6g} at k_r={k_r:.6g}",
                    )
                )

    return ValidationReport(issues=tuple(issues), min_disjoint_margin=min_margin)
