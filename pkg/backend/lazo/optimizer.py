# lazo/optimizer.py
"""
projected zeroth-order SGD 드라이버.

    x_{t+1} = Π_X(x_t - η g̃_t(x_t))

run() 은 oracle / estimator / 가능 영역을 묶어서 라운드 0..T 를 실행하고
라운드별 기록(Trajectory)을 돌려준다. 제약 없는 문제는 투영을 건너뛴다.
"""
from __future__ import annotations

import copy
import hashlib
import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .estimators import EstimatorConfig, GradientEstimate, GradientEstimator, QueryCache
from .exceptions import InvalidConfig, InvalidInput, LazoError, RoundError, TraceIntegrityError
from .numerics import FeasibleSet, make_rng, project, sample_in_set
from .oracles import LossOracle, ProblemConfig, build_oracle

logger = logging.getLogger(__name__)


def sqrt_horizon_preset(radius: float, lipschitz: float, d: int, horizon: int):
    """η = R / (L √(dT)),  δ = R √(d / T)."""
    if radius <= 0 or lipschitz <= 0 or d < 1 or horizon < 1:
        raise InvalidConfig("preset needs R > 0, L > 0, d >= 1 and T >= 1")
    eta = radius / (lipschitz * math.sqrt(d * horizon))
    delta = radius * math.sqrt(d / horizon)
    return eta, delta


@dataclass(frozen=True)
class RunConfig:
    """
    실행 하나의 전체 파라미터.

    label 은 같은 ExperimentSpec 안에서 방법(method)을 구분하는 이름.
    """

    problem: ProblemConfig
    estimator: EstimatorConfig
    horizon: int
    step_size: float
    feasible_set: FeasibleSet = field(default_factory=FeasibleSet.unconstrained)
    seed: int = 0
    trials: int = 10
    x0: str = "zero"
    label: str = ""

    def __post_init__(self):
        if self.horizon < 0:
            raise InvalidConfig(f"horizon must be >= 0, got {self.horizon}")
        if not self.step_size > 0 or not math.isfinite(self.step_size):
            raise InvalidConfig(f"step size must be a positive finite number, got {self.step_size}")
        if self.trials < 1:
            raise InvalidConfig(f"trial count must be >= 1, got {self.trials}")
        if self.x0 not in ("zero", "random"):
            raise InvalidConfig(f"unknown x0 recipe: {self.x0!r}")

    @property
    def name(self) -> str:
        return self.label or self.estimator.variant


@dataclass(frozen=True)
class RoundRecord:
    """
    라운드 t 의 기록.

    CSV 로 나가는 필드: t, loss, cum_queries, queries, rule_fired, variation, est_sq_norm.
    x, gradient, point, point_value 는 메모리에만 남는다 (검증/replay 용).
    """

    t: int
    loss: float
    est_sq_norm: float
    queries: int
    rule_fired: str
    variation: Optional[float]
    cum_queries: int
    x: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    gradient: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    point: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    point_value: Optional[float] = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class RoundSnapshot:
    """대칭성 진단용: 라운드 t 의 x_t, estimator 캐시, 라운드가 고정된 oracle 사본."""

    t: int
    x: np.ndarray
    cache: QueryCache
    oracle: LossOracle
    step_size: float


@dataclass
class Trajectory:
    records: List[RoundRecord]
    final_iterate: np.ndarray
    duration: float
    trial: int = 0
    label: str = ""
    oracle_checksum: str = ""
    capped_evaluations: int = 0
    snapshots: List[RoundSnapshot] = field(default_factory=list, repr=False)

    @property
    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records])

    @property
    def total_queries(self) -> int:
        return self.records[-1].cum_queries if self.records else 0

    @property
    def final_loss(self) -> float:
        return self.records[-1].loss

    @property
    def loss_checksum(self) -> str:
        return checksum(self.losses)


def checksum(values: Sequence[float]) -> str:
    """float64 바이트열의 SHA-256 (앞 16자리)."""
    digest = hashlib.sha256(np.asarray(values, dtype=np.float64).tobytes())
    return digest.hexdigest()[:16]


def sgd_step(x: np.ndarray, estimate: GradientEstimate, eta: float, feasible_set: FeasibleSet) -> np.ndarray:
    if not isinstance(estimate, GradientEstimate):
        raise InvalidInput(f"sgd_step needs a GradientEstimate, got {type(estimate).__name__}")
    moved = x - eta * estimate.vector
    if not feasible_set.is_constrained:
        return moved
    return project(moved, feasible_set)


def initial_point(config: RunConfig, dimension: int, trial: int) -> np.ndarray:
    if config.x0 == "random":
        return sample_in_set(make_rng(config.seed, trial, "init"), config.feasible_set, dimension)
    return np.zeros(dimension)


def run(config: RunConfig, trial: int = 0, snapshot_rounds: Sequence[int] = ()) -> Trajectory:
    """
    bootstrap 을 포함해 라운드 0..T 를 실행한다.

    라운드마다:
      1) advance_round(t)
      2) f_t(x_t) 를 집계되지 않는 채널로 기록 (regret 용)
      3) estimator step (집계되는 질의)
      4) sgd_step
    oracle/estimator 오류는 라운드 번호를 붙여 RoundError 로 올린다.
    """
    started = time.perf_counter()
    oracle = build_oracle(config.problem, config.seed, trial)
    d = oracle.dimension
    rng = make_rng(config.seed, trial, "directions")
    estimator = GradientEstimator(config.estimator)
    eta = config.step_size
    x = initial_point(config, d, trial)
    origin = np.zeros(d)
    wanted = set(snapshot_rounds)

    logger.info("run %s trial=%d seed=%d problem=%s T=%d",
                config.name, trial, config.seed, config.problem.name, config.horizon)

    records: List[RoundRecord] = []
    snapshots: List[RoundSnapshot] = []
    origin_values = []
    cum = 0
    for t in range(config.horizon + 1):
        try:
            oracle.advance_round(t)
            loss = oracle.eval_unmetered(x)
            origin_values.append(oracle.eval_unmetered(origin))
            if t in wanted:
                snapshots.append(RoundSnapshot(t, x.copy(), estimator.cache.copy(),
                                               copy.deepcopy(oracle), eta))
            estimate: GradientEstimate = estimator.step(oracle, x, rng, eta)
        except RoundError:
            raise
        except LazoError as exc:
            raise RoundError(t, exc) from exc

        cum += estimate.queries_used
        records.append(RoundRecord(
            t=t,
            loss=loss,
            est_sq_norm=estimate.sq_norm,
            queries=estimate.queries_used,
            rule_fired=estimate.rule_label,
            variation=estimate.variation_observed,
            cum_queries=cum,
            x=x,
            gradient=estimate.vector,
            point=estimate.point,
            point_value=estimate.point_value,
        ))
        x = sgd_step(x, estimate, eta, config.feasible_set)

    if cum != oracle.query_count:
        raise TraceIntegrityError(
            f"query accounting mismatch: recorded {cum}, oracle metered {oracle.query_count}")

    capped = getattr(oracle, "capped_evaluations", 0)
    if capped:
        logger.warning("%s trial=%d: %d LQR evaluations hit the cost cap", config.name, trial, capped)
    duration = time.perf_counter() - started
    logger.info("done %s trial=%d final_loss=%.6g queries=%d (%.2fs)",
                config.name, trial, records[-1].loss, cum, duration)
    return Trajectory(
        records=records,
        final_iterate=x,
        duration=duration,
        trial=trial,
        label=config.name,
        oracle_checksum=checksum(origin_values),
        capped_evaluations=capped,
        snapshots=snapshots,
    )
