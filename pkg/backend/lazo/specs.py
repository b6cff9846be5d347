# lazo/specs.py
"""
실험 설정 파일(JSON) 로딩/정규화.

설정 파일 구조:
    {
      "name": "lqr-burst",
      "seed": 0,
      "trials": 10,
      "output": "out/lqr",
      "problem":   {"name": "lqr", "params": {...}, "feasible_set": {"kind": "unconstrained"}},
      "optimizer": {"horizon": 1000, "step_size": 1e-5, "preset": null, "x0": "zero"},
      "estimator": {"variant": "lazo_a", "delta": 0.01, "threshold": 1},
      "methods":   [{"label": "LAZOa", "variant": "lazo_a", "threshold": 1}, ...],
      "diagnostics": {...},
      "sweep": {"threshold": [...], "step_size": [...], "delta": [...]}
    }

- 빠진 값은 settings.LAZO 의 기본값으로 채운다.
- methods 가 있으면 estimator 섹션을 공통값으로 두고 방법별로 덮어쓴다.
- threshold 가 "inf" / "infinity" / null 이면 D = +∞.
"""
from __future__ import annotations

import json
import logging
import math
from copy import deepcopy
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from django.conf import settings

from .estimators import EstimatorConfig
from .exceptions import InvalidConfig
from .numerics import FeasibleSet
from .oracles import PROBLEMS, ProblemConfig, build_oracle
from .optimizer import RunConfig, sqrt_horizon_preset

logger = logging.getLogger(__name__)

SECTIONS = ("problem", "estimator", "optimizer", "diagnostics")
SWEEP_KEYS = ("threshold", "step_size", "delta")


@dataclass(frozen=True)
class DiagnosticsConfig:
    symmetry_rounds: Sequence[int] = (10,)
    symmetry_samples: int = 40000
    projections: int = 4
    variance_rounds: Sequence[int] = ()
    variance_samples: int = 1000
    mc_samples: int = 0
    lipschitz: Optional[float] = None


@dataclass(frozen=True)
class ExperimentSpec:
    """
    한 문제/시드 패널 위의 방법 비교.

    runs 의 모든 RunConfig 는 problem, horizon, seed 를 공유한다 (짝지은 비교).
    """

    name: str
    runs: List[RunConfig]
    trials: int
    seed: int
    output_dir: Optional[Path] = None
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    sweep: Dict[str, List[float]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.runs:
            raise InvalidConfig("experiment has no methods to run")
        first = self.runs[0]
        for cfg in self.runs[1:]:
            if (cfg.problem != first.problem or cfg.horizon != first.horizon
                    or cfg.seed != first.seed):
                raise InvalidConfig("all methods in one experiment must share problem, horizon and seed")


# ----- 값 변환 헬퍼 -----

def as_float(value: Any, key: str) -> float:
    if value is None:
        return math.inf
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"{key}: expected a number, got {value!r}") from exc


def _as_int(value: Any, key: str) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"{key}: expected an integer, got {value!r}") from exc
    if out != value and not isinstance(value, str):
        raise InvalidConfig(f"{key}: expected an integer, got {value!r}")
    return out


def _section(data: Dict[str, Any], key: str) -> Dict[str, Any]:
    value = data.get(key)
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise InvalidConfig(f"section {key!r} must be an object")
    return value


# ----- 정규화 -----

def normalize_config(payload: Dict[str, Any]) -> Dict[str, Any]:
    """
    설정 payload 를 저장/실행 전에 정리(normalize)한다.

    - 섹션 존재 여부 및 타입 보정
    - problem.params 는 settings 기본값 위에 병합
    - feasible_set 이 없으면 문제별 기본값
    - estimator / optimizer / diagnostics 기본값 채우기
    - seed, trials 기본값 채우기
    """
    if not isinstance(payload, dict):
        raise InvalidConfig("config root must be a JSON object")
    defaults = settings.LAZO
    data = deepcopy(payload)

    # ----- problem -----
    problem = _section(data, "problem")
    name = problem.get("name")
    if name not in PROBLEMS:
        raise InvalidConfig(f"problem.name must be one of {', '.join(PROBLEMS)}, got {name!r}")
    params = deepcopy(defaults["PROBLEMS"].get(name, {}))
    params.update(_section(problem, "params"))
    problem["params"] = params
    fs = problem.get("feasible_set") or deepcopy(defaults["FEASIBLE_SETS"][name])
    if not isinstance(fs, dict):
        raise InvalidConfig("problem.feasible_set must be an object")
    problem["feasible_set"] = fs
    data["problem"] = problem

    # ----- estimator / optimizer / diagnostics -----
    for key, default_key in (("estimator", "ESTIMATOR"), ("optimizer", "OPTIMIZER"),
                             ("diagnostics", "DIAGNOSTICS")):
        merged = deepcopy(defaults[default_key])
        merged.update(_section(data, key))
        data[key] = merged

    methods = data.get("methods")
    if methods is None:
        data["methods"] = [{}]
    elif not isinstance(methods, list) or not all(isinstance(m, dict) for m in methods):
        raise InvalidConfig("methods must be a list of objects")
    elif not methods:
        raise InvalidConfig("methods list is empty")

    # ----- seed / trials -----
    data["seed"] = _as_int(data.get("seed", defaults["DEFAULT_SEED"]), "seed")
    data["trials"] = _as_int(data.get("trials", defaults["DEFAULT_TRIALS"]), "trials")
    if data["seed"] < 0:
        raise InvalidConfig("seed must be non-negative")

    sweep = _section(data, "sweep")
    for key in sweep:
        if key not in SWEEP_KEYS:
            raise InvalidConfig(f"sweep.{key} is not a sweepable parameter ({', '.join(SWEEP_KEYS)})")
        if not isinstance(sweep[key], list) or not sweep[key]:
            raise InvalidConfig(f"sweep.{key} must be a non-empty list")
    data["sweep"] = sweep
    return data


def _feasible_set(spec: Dict[str, Any]) -> FeasibleSet:
    kind = spec.get("kind", "unconstrained")
    if kind == "ball":
        return FeasibleSet.ball(as_float(spec.get("radius"), "feasible_set.radius"))
    if kind == "box":
        return FeasibleSet.box(spec.get("lower"), spec.get("upper"))
    if kind == "unconstrained":
        return FeasibleSet.unconstrained()
    raise InvalidConfig(f"unknown feasible_set.kind: {kind!r}")


def _estimator(base: Dict[str, Any], delta: float) -> EstimatorConfig:
    return EstimatorConfig(
        variant=str(base.get("variant")),
        delta=delta,
        threshold=as_float(base.get("threshold"), "threshold"),
        lipschitz_scale=as_float(base.get("lipschitz_scale", 1.0), "lipschitz_scale"),
        history_len=_as_int(base.get("history_len", 1), "history_len"),
        directions_per_round=_as_int(base.get("directions_per_round", 1), "directions_per_round"),
    )


def build_experiment(data: Dict[str, Any], source: str = "<config>",
                     output: Optional[str] = None) -> ExperimentSpec:
    """정규화된 설정을 ExperimentSpec 으로 변환한다."""
    problem_section = data["problem"]
    problem = ProblemConfig(name=problem_section["name"], params=problem_section["params"])
    feasible_set = _feasible_set(problem_section["feasible_set"])
    opt = data["optimizer"]
    horizon = _as_int(opt.get("horizon"), "optimizer.horizon")
    seed = data["seed"]

    runs = []
    for index, method in enumerate(data["methods"]):
        merged = dict(data["estimator"])
        merged.update(method)
        step_size = merged.get("step_size", opt.get("step_size"))
        delta = merged.get("delta")

        preset = merged.get("preset", opt.get("preset"))
        if preset == "sqrt_horizon":
            radius = opt.get("radius", feasible_set.radius)
            lipschitz = opt.get("lipschitz")
            if radius is None or lipschitz is None:
                raise InvalidConfig("sqrt_horizon preset needs optimizer.radius (or a ball set) and optimizer.lipschitz")
            dimension = build_oracle(problem, seed, 0).dimension
            step_size, delta = sqrt_horizon_preset(as_float(radius, "radius"), as_float(lipschitz, "lipschitz"),
                                               dimension, horizon)
        elif preset is not None:
            raise InvalidConfig(f"unknown optimizer preset: {preset!r}")

        estimator = _estimator(merged, as_float(delta, "delta"))
        label = str(merged.get("label") or estimator.variant)
        runs.append(RunConfig(
            problem=problem,
            estimator=estimator,
            horizon=horizon,
            step_size=as_float(step_size, "step_size"),
            feasible_set=feasible_set,
            seed=seed,
            trials=data["trials"],
            x0=str(opt.get("x0", "zero")),
            label=label,
        ))

    labels = [r.label for r in runs]
    if len(set(labels)) != len(labels):
        raise InvalidConfig(f"method labels must be unique, got {labels}")

    diag = data["diagnostics"]
    diagnostics = DiagnosticsConfig(
        symmetry_rounds=tuple(_as_int(v, "symmetry_rounds") for v in diag.get("symmetry_rounds") or ()),
        symmetry_samples=_as_int(diag.get("symmetry_samples"), "symmetry_samples"),
        projections=_as_int(diag.get("projections"), "projections"),
        variance_rounds=tuple(_as_int(v, "variance_rounds") for v in diag.get("variance_rounds") or ()),
        variance_samples=_as_int(diag.get("variance_samples"), "variance_samples"),
        mc_samples=_as_int(diag.get("mc_samples"), "mc_samples"),
        lipschitz=None if diag.get("lipschitz") is None else as_float(diag["lipschitz"], "lipschitz"),
    )
    out = output or data.get("output")
    sweep = {k: [as_float(v, f"sweep.{k}") for v in values] for k, values in data["sweep"].items()}
    logger.debug("loaded %s: %d method(s), T=%d, trials=%d", source, len(runs), horizon, data["trials"])
    return ExperimentSpec(
        name=str(data.get("name") or Path(source).stem),
        runs=runs,
        trials=data["trials"],
        seed=seed,
        output_dir=Path(out) if out else None,
        diagnostics=diagnostics,
        sweep=sweep,
    )


def load_experiment(path, seed: Optional[int] = None, output: Optional[str] = None,
                    trials: Optional[int] = None) -> ExperimentSpec:
    """
    설정 파일을 읽어 ExperimentSpec 을 만든다.

    seed / trials 를 주면 파일 값 대신 쓴다 (--seed 플래그).
    파일이 없거나 JSON 이 깨졌으면 InvalidConfig (메시지에 파일 경로 포함).
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise InvalidConfig(f"config file not found: {path}") from exc
    except OSError as exc:
        raise InvalidConfig(f"cannot read config file {path}: {exc}") from exc
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"malformed JSON in {path}: {exc}") from exc
    if isinstance(payload, dict):
        if seed is not None:
            payload["seed"] = seed
        if trials is not None:
            payload["trials"] = trials
    try:
        return build_experiment(normalize_config(payload), source=str(path), output=output)
    except InvalidConfig as exc:
        raise InvalidConfig(f"{path}: {exc}") from exc


def with_overrides(config: RunConfig, threshold: Optional[float] = None, step_size: Optional[float] = None,
                   delta: Optional[float] = None) -> RunConfig:
    """sweep 격자점 하나에 해당하는 RunConfig."""
    estimator = config.estimator
    if threshold is not None:
        estimator = replace(estimator, threshold=threshold)
    if delta is not None:
        estimator = replace(estimator, delta=delta)
    return replace(config, estimator=estimator,
                   step_size=config.step_size if step_size is None else step_size)
