# lazo/diagnostics.py
"""
진단 모듈.

1) regret: 사후 최적 고정 결정 x*, 누적 regret 곡선, log-log 기울기
2) 분산: 고정된 라운드/캐시 상태에서 estimator 출력의 Monte-Carlo 분산
3) 이론 부등식 검증: instance-dependent bound, reduced-norm 조건
4) 대칭성 진단: lazy 규칙이 재사용하는 방향 집합 A_t 의 대척점(antipodal) 비대칭도

모든 oracle 평가는 집계되지 않는 채널로 한다.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .estimators import (
    REUSED,
    EstimatorConfig,
    GradientEstimator,
    QueryCache,
    _variation,
    instance_bound_rhs,
    reduced_norm_condition,
)
from .exceptions import (
    DegenerateInput,
    InsufficientTrace,
    InvalidConfig,
    TraceIntegrityError,
    UnsupportedOperation,
)
from .numerics import FeasibleSet, project, random_projection_matrix, sample_unit_sphere_batch
from .oracles import LossOracle, UnmeteredView, build_oracle
from .optimizer import RoundSnapshot, RunConfig, Trajectory, checksum

logger = logging.getLogger(__name__)

# 부동소수점 반올림만큼의 여유
_BOUND_RTOL = 1e-9
_BOUND_ATOL = 1e-12


# ----- replay -----

class ProblemReplay:
    """같은 (problem, seed, trial) 로 oracle 을 새로 만들어 손실 시퀀스를 다시 재생한다."""

    def __init__(self, config: RunConfig, trial: int = 0, horizon: Optional[int] = None):
        self.config = config
        self.trial = trial
        self.horizon = config.horizon if horizon is None else horizon

    def fresh_oracle(self) -> LossOracle:
        return build_oracle(self.config.problem, self.config.seed, self.trial)

    def rounds(self) -> Iterator[Tuple[int, LossOracle]]:
        oracle = self.fresh_oracle()
        for t in range(self.horizon + 1):
            oracle.advance_round(t)
            yield t, oracle


# ----- regret -----

@dataclass
class RegretCurve:
    values: np.ndarray
    comparator: np.ndarray
    method: str

    @property
    def final(self) -> float:
        return float(self.values[-1])


def best_fixed_decision(replay: ProblemReplay, feasible_set: Optional[FeasibleSet] = None,
                        tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """
    Σ_t f_t(x) 를 최소화하는 고정 결정 x*.

    이차 손실 계열(quadratic, regression)만 지원한다. 라운드별 (Hessian, 원점 기울기) 를
    합산해서 제약이 없거나 해가 내부에 있으면 선형 방정식의 해를,
    아니면 합산된 이차식 위에서 projected gradient descent 결과를 돌려준다.
    """
    feasible_set = feasible_set or replay.config.feasible_set
    hessian = None
    linear = None
    for _t, oracle in replay.rounds():
        form = getattr(oracle, "quadratic_form", None)
        if form is None:
            raise UnsupportedOperation(
                f"best fixed decision is not available for problem {replay.config.problem.name!r}")
        h, g = form()
        hessian = h.copy() if hessian is None else hessian + h
        linear = g.copy() if linear is None else linear + g

    x_star = np.linalg.lstsq(hessian, -linear, rcond=None)[0]
    if not feasible_set.is_constrained or feasible_set.contains(x_star, tol=0.0):
        return x_star

    # 해가 영역 밖이면 합산된 이차식 위에서 투영 경사하강
    step = 1.0 / max(np.linalg.eigvalsh(0.5 * (hessian + hessian.T)).max(), 1e-300)
    x = project(x_star, feasible_set)
    for _ in range(max_iter):
        nxt = project(x - step * (hessian @ x + linear), feasible_set)
        if np.linalg.norm(nxt - x) <= tol * max(1.0, np.linalg.norm(x)):
            return nxt
        x = nxt
    logger.warning("projected descent for x* stopped after %d iterations", max_iter)
    return x


def regret_curve(trajectory: Trajectory, x_star: np.ndarray, replay: ProblemReplay,
                 method: str = "best_fixed") -> RegretCurve:
    """
    curve[t] = Σ_{s<=t} (f_s(x_s) - f_s(x*)).

    replay 로 f_s(x_s) 를 다시 계산해서 기록된 손실 시퀀스의 checksum 과 비교한다.
    다르면 seed 가 어긋난 것이므로 TraceIntegrityError.
    """
    recomputed = []
    comparator = []
    horizon = len(trajectory.records) - 1
    for t, oracle in ProblemReplay(replay.config, replay.trial, horizon).rounds():
        rec = trajectory.records[t]
        if rec.x is None:
            raise InsufficientTrace("trajectory does not keep iterates; rerun in memory")
        recomputed.append(oracle.eval_unmetered(rec.x))
        comparator.append(oracle.eval_unmetered(x_star))
    if checksum(recomputed) != trajectory.loss_checksum:
        raise TraceIntegrityError("replayed losses do not match the trajectory (seed mismatch?)")
    values = np.cumsum(trajectory.losses - np.asarray(comparator))
    return RegretCurve(values=values, comparator=np.asarray(x_star, dtype=float), method=method)


def regret_slope(horizons: Sequence[float], regrets: Sequence[float]) -> float:
    """log R_T 대 log T 의 최소제곱 기울기."""
    slope, _intercept = np.polyfit(np.log(horizons), np.log(regrets), 1)
    return float(slope)


# ----- 분산 -----

@dataclass(frozen=True)
class VarianceTrace:
    samples: int
    mean_sq_norm: float
    norm_variance: float
    mean_vector: np.ndarray = field(repr=False)


def estimator_variance_trace(config: EstimatorConfig, oracle, x: np.ndarray, samples: int,
                             rng: np.random.Generator, cache: Optional[QueryCache] = None,
                             step_size: float = 1.0) -> VarianceTrace:
    """
    라운드가 고정된 oracle 에서 새 방향 N 개로 estimator 를 돌려
    ||g̃|| 의 표본분산(ddof=1)과 ||g̃||^2 의 평균을 구한다. 캐시 상태는 그대로 둔다.
    """
    if samples < 2:
        raise InvalidConfig(f"variance trace needs at least 2 samples, got {samples}")
    view = UnmeteredView(oracle)
    estimator = GradientEstimator(config)
    if cache is not None:
        estimator.cache = cache
        estimator.rounds_seen = min(len(cache), config.bootstrap_rounds)
    vectors = np.empty((samples, len(x)))
    for i in range(samples):
        vectors[i] = estimator.step(view, x, rng, step_size, record=False).vector
    sq_norms = np.einsum("ij,ij->i", vectors, vectors)
    norms = np.sqrt(sq_norms)
    return VarianceTrace(samples=samples, mean_sq_norm=float(sq_norms.mean()),
                         norm_variance=float(norms.var(ddof=1)), mean_vector=vectors.mean(axis=0))


def variance_along_run(trajectory: Trajectory, config: EstimatorConfig, samples: int,
                       rng: np.random.Generator) -> List[Tuple[int, VarianceTrace]]:
    """run(snapshot_rounds=...) 로 잡은 스냅샷마다 분산을 잰다."""
    out = []
    for snap in trajectory.snapshots:
        trace = estimator_variance_trace(config, snap.oracle, snap.x, samples, rng,
                                         cache=snap.cache.copy(), step_size=snap.step_size)
        out.append((snap.t, trace))
    return out


# ----- 이론 부등식 검증 -----

@dataclass
class BoundReport:
    rounds_checked: int = 0
    bound_violations: int = 0
    degenerate_rounds: int = 0
    reduced_norm_premise_rounds: int = 0
    reduced_norm_violations: int = 0
    second_moments: Dict[str, float] = field(default_factory=dict)
    statistics: Dict[str, float] = field(default_factory=dict)


def validate_bounds(trajectory: Trajectory, config: RunConfig, lipschitz: Optional[float] = None,
                    replay: Optional[ProblemReplay] = None, mc_samples: int = 0,
                    rng: Optional[np.random.Generator] = None) -> BoundReport:
    """
    재사용(residual) 라운드마다

      ||g̃_t||^2 <= |Δf|^2/||Δw||^2 · (8d^2 + 2d^2 η^2/δ^2 ||g̃_{t-1}||^2)

    를 확인한다. lipschitz 가 주어지면 reduced-norm 조건이 참인 라운드에서
    ||g̃_t||^2 < d L^2 인지도 센다. replay 와 mc_samples 가 있으면 라운드 0, x_0 에서
    고전 estimator 들의 MC 2차 모멘트를 붙인다.
    """
    report = BoundReport()
    est_cfg = config.estimator
    if not est_cfg.is_multipoint and trajectory.records:
        records = trajectory.records
        for prev, rec in zip(records, records[1:]):
            if rec.rule_fired != REUSED:
                continue
            if rec.point is None or prev.point is None or rec.point_value is None:
                raise InsufficientTrace(f"round {rec.t} lacks the perturbed point or its value")
            d = len(rec.point)
            report.rounds_checked += 1
            try:
                rhs = instance_bound_rhs(rec.point_value, prev.point_value, rec.point, prev.point,
                                         prev.est_sq_norm, d, config.step_size, est_cfg.delta)
            except DegenerateInput:
                report.degenerate_rounds += 1
                continue
            if rec.est_sq_norm > rhs * (1.0 + _BOUND_RTOL) + _BOUND_ATOL:
                report.bound_violations += 1
                logger.warning("instance bound violated at round %d: %.6g > %.6g",
                               rec.t, rec.est_sq_norm, rhs)
            if lipschitz is not None and reduced_norm_condition(
                    rec.point_value, prev.point_value, rec.point, prev.point,
                    prev.est_sq_norm, d, lipschitz):
                report.reduced_norm_premise_rounds += 1
                if rec.est_sq_norm >= d * lipschitz ** 2:
                    report.reduced_norm_violations += 1
    elif est_cfg.is_multipoint:
        logger.info("instance bound applies to single-point rules only; skipped for %s", est_cfg.variant)

    if replay is not None and mc_samples >= 2:
        rng = rng if rng is not None else np.random.default_rng(config.seed)
        oracle = replay.fresh_oracle()
        oracle.advance_round(0)
        x0 = trajectory.records[0].x if trajectory.records and trajectory.records[0].x is not None \
            else np.zeros(oracle.dimension)
        for variant in ("one_point", "two_point_asym", "two_point_sym"):
            cfg = EstimatorConfig(variant=variant, delta=est_cfg.delta)
            trace = estimator_variance_trace(cfg, oracle, x0, mc_samples, rng)
            report.second_moments[variant] = trace.mean_sq_norm
    return report


def variation_statistics(replay: ProblemReplay, points: np.ndarray) -> Dict[str, float]:
    """
    고정된 점들 위에서 잰 분석용 상수.

    - variation: Σ_t max_x |f_t(x) - f_{t-1}(x)|
    - max_abs_loss: max_{t,x} |f_t(x)|
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    previous = None
    variation = 0.0
    largest = 0.0
    for _t, oracle in replay.rounds():
        values = np.array([oracle.eval_unmetered(p) for p in points])
        largest = max(largest, float(np.abs(values).max()))
        if previous is not None:
            variation += float(np.abs(values - previous).max())
        previous = values
    return {"variation": variation, "max_abs_loss": largest}


def estimation_error_trace(trajectory: Trajectory, replay: ProblemReplay) -> List[Tuple[int, Optional[float], float]]:
    """
    라운드마다 (t, temporal variation, ||g̃_t - ∇f_t(x_t)||). 참 기울기가 있는 문제만.

    variation 을 재지 않는 라운드 (bootstrap, 고전 two-point) 는 variation 이 None.
    """
    out = []
    horizon = len(trajectory.records) - 1
    for t, oracle in ProblemReplay(replay.config, replay.trial, horizon).rounds():
        rec = trajectory.records[t]
        if rec.x is None or rec.gradient is None:
            raise InsufficientTrace("trajectory does not keep iterates and estimates")
        error = float(np.linalg.norm(rec.gradient - oracle.true_gradient(rec.x)))
        out.append((t, rec.variation, error))
    return out


# ----- 대칭성 진단 -----

@dataclass
class SymmetryReport:
    round_index: int
    samples: int
    member_fraction: float
    asymmetry_score: float
    directions: np.ndarray = field(repr=False)
    membership: np.ndarray = field(repr=False)
    projections: List[np.ndarray] = field(default_factory=list, repr=False)


def asymmetry_score(member_plus: np.ndarray, member_minus: np.ndarray) -> float:
    """
    대척점 쌍 (u, -u) 에서 한쪽만 A_t 에 속하는 샘플 수 / A_t 에 속한 샘플 수.
    """
    plus = np.asarray(member_plus, dtype=bool)
    minus = np.asarray(member_minus, dtype=bool)
    one_sided = int(np.sum(plus & ~minus) + np.sum(minus & ~plus))
    members = int(plus.sum() + minus.sum())
    return one_sided / max(1, members)


def symmetry_diagnostic(snapshot: RoundSnapshot, config: EstimatorConfig, samples: int,
                        projections: int, rng: np.random.Generator, proj_dim: int = 2,
                        membership: Optional[Callable[[np.ndarray], bool]] = None) -> SymmetryReport:
    """
    라운드 t 스냅샷에서 N/2 개의 대척점 쌍을 뽑아 lazy 규칙의 재사용 여부(A_t 소속)를 보고
    비대칭도를 잰다. 소속 판정은 집계되지 않는 채널만 쓴다.

    membership 을 주면 규칙 대신 그 판정 함수를 쓴다 (테스트용).
    비대칭도는 투영 전 방향에서 계산하므로 투영 행렬과 무관하다.
    """
    if samples < 2:
        raise InvalidConfig(f"symmetry diagnostic needs at least 2 samples, got {samples}")
    d = len(snapshot.x)
    if membership is None:
        if config.rule is None:
            raise InvalidConfig(f"variant {config.variant!r} has no lazy rule to diagnose")
        view = UnmeteredView(snapshot.oracle)
        prev = snapshot.cache.latest()
        x = snapshot.x

        def membership(u: np.ndarray) -> bool:
            w = x + config.delta * u
            value = view.query(w)
            variation = _variation(config, value, prev.value, w, prev.point, snapshot.step_size,
                                   view.value_cap)
            return variation <= config.threshold

    half = samples // 2
    plus_dirs = sample_unit_sphere_batch(rng, d, half)
    plus = np.array([membership(u) for u in plus_dirs], dtype=bool)
    minus = np.array([membership(-u) for u in plus_dirs], dtype=bool)

    directions = np.concatenate([plus_dirs, -plus_dirs])
    flags = np.concatenate([plus, minus])
    projected = []
    for _ in range(projections):
        matrix = random_projection_matrix(rng, d, min(proj_dim, d))
        projected.append(directions @ matrix.T)

    score = asymmetry_score(plus, minus)
    logger.info("symmetry round=%d samples=%d members=%d score=%.4f",
                snapshot.t, len(flags), int(flags.sum()), score)
    return SymmetryReport(round_index=snapshot.t, samples=len(flags),
                          member_fraction=float(flags.mean()) if len(flags) else 0.0,
                          asymmetry_score=score, directions=directions, membership=flags,
                          projections=projected)
