# lazo/oracles.py
"""
시간에 따라 바뀌는 손실 함수 f_t 를 감싸는 oracle 들.

- query()          : 질의 횟수(query complexity)로 집계되는 채널
- eval_unmetered() : regret 계산/진단용, 집계되지 않는 채널
- advance_round(t) : 라운드 t 의 랜덤성(z_t, A_t/B_t, p_t 등)을 고정

벤치마크 문제:
1) SyntheticQuadraticOracle  : 단위 테스트용 이차 함수 (정답 x*, 기울기 알려짐)
2) LinearRegressionOracle    : 잡음 섞인 온라인 선형 회귀
3) LQROracle                 : 동역학이 간헐적으로 바뀌는 LQR 정책 탐색
4) ResourceAllocationOracle  : 링 그래프 위 16 에이전트 자원 분배
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InvalidConfig, InvalidInput, SequencingError, UnsupportedOperation
from .numerics import make_rng

logger = logging.getLogger(__name__)

PROBLEMS = ("quadratic", "regression", "lqr", "resource_allocation")


class LossOracle:
    """
    모든 oracle 의 공통 베이스.

    하위 클래스는 _begin_round(t), _loss(x) 를 구현하고,
    기울기를 알 수 있으면 has_true_gradient = True 와 _gradient(x) 를 구현한다.
    """

    has_true_gradient = False
    # 손실이 이 값에서 잘리면 (포화) 그 값을 돌려준다. None 이면 상한 없음
    value_cap: Optional[float] = None

    def __init__(self, dimension: int, rng: np.random.Generator):
        if dimension < 1:
            raise InvalidConfig(f"oracle dimension must be >= 1, got {dimension}")
        self.dimension = int(dimension)
        self.rng = rng
        self.round: Optional[int] = None
        self.query_count = 0

    # ----- 라운드 진행 -----

    def advance_round(self, t: int) -> None:
        expected = 0 if self.round is None else self.round + 1
        if t != expected:
            raise SequencingError(f"expected round {expected}, got {t}")
        self._begin_round(t)
        self.round = t

    def _begin_round(self, t: int) -> None:
        raise NotImplementedError

    # ----- 질의 채널 -----

    def query(self, x) -> float:
        x = self._check(x)
        self.query_count += 1
        return self._loss(x)

    def eval_unmetered(self, x) -> float:
        return self._loss(self._check(x))

    def true_gradient(self, x) -> np.ndarray:
        if not self.has_true_gradient:
            raise UnsupportedOperation(f"{type(self).__name__} has no true gradient")
        return self._gradient(self._check(x))

    def _loss(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, x) -> np.ndarray:
        if self.round is None:
            raise SequencingError("no round has been started; call advance_round(0) first")
        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.dimension,):
            raise InvalidInput(f"expected a vector of length {self.dimension}, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInput("query point has non-finite entries")
        return arr


class UnmeteredView:
    """
    oracle 을 감싸서 query() 도 집계되지 않는 채널로 돌리는 래퍼.

    진단 코드(분산 추정, 대칭성 진단)가 estimator 를 그대로 재사용하면서도
    질의 횟수 통계를 건드리지 않게 하기 위함.
    """

    def __init__(self, oracle: LossOracle):
        self._oracle = oracle

    @property
    def dimension(self) -> int:
        return self._oracle.dimension

    @property
    def round(self) -> Optional[int]:
        return self._oracle.round

    @property
    def query_count(self) -> int:
        return self._oracle.query_count

    @property
    def has_true_gradient(self) -> bool:
        return self._oracle.has_true_gradient

    @property
    def value_cap(self) -> Optional[float]:
        return self._oracle.value_cap

    def query(self, x) -> float:
        return self._oracle.eval_unmetered(x)

    def eval_unmetered(self, x) -> float:
        return self._oracle.eval_unmetered(x)

    def true_gradient(self, x) -> np.ndarray:
        return self._oracle.true_gradient(x)


# ----- 이차 함수 (테스트용) -----

class SyntheticQuadraticOracle(LossOracle):
    """
    f_t(x) = (x - a_t)^T C (x - a_t) + z_t

    schedule:
      - stationary: a_t = a_0
      - drift     : a_t = a_{t-1} + drift_std * N(0, I)
      - burst     : burst 구간에서만 a_0 + amplitude * sin(frequency * (t mod period))
      - explicit  : centers 목록을 라운드마다 순환
    """

    has_true_gradient = True
    SCHEDULES = ("stationary", "drift", "burst", "explicit")

    def __init__(self, rng: np.random.Generator, dimension: Optional[int] = None,
                 center: Optional[Sequence[float]] = None, curvature: Optional[np.ndarray] = None,
                 schedule: str = "stationary", centers: Optional[Sequence[Sequence[float]]] = None,
                 drift_std: float = 0.01, burst_amplitude: float = 1.0, burst_frequency: float = 7.0,
                 burst_period: int = 100, burst_window: Tuple[int, int] = (35, 65),
                 noise_std: float = 0.0):
        if schedule not in self.SCHEDULES:
            raise InvalidConfig(f"unknown quadratic schedule: {schedule!r}")
        if schedule == "explicit":
            if not centers:
                raise InvalidConfig("explicit schedule needs a non-empty centers list")
            self.centers = np.atleast_2d(np.asarray(centers, dtype=float))
            dimension = self.centers.shape[1]
        else:
            self.centers = None
        if center is None:
            if dimension is None:
                raise InvalidConfig("quadratic oracle needs a dimension or a center")
            center = np.ones(int(dimension))
        center = np.asarray(center, dtype=float)
        super().__init__(dimension or center.shape[0], rng)
        if center.shape != (self.dimension,):
            raise InvalidConfig("center length does not match the dimension")

        self.initial_center = center
        self.curvature = np.eye(self.dimension) if curvature is None else np.asarray(curvature, dtype=float)
        if self.curvature.shape != (self.dimension, self.dimension):
            raise InvalidConfig("curvature must be a d×d matrix")
        self.schedule = schedule
        self.drift_std = float(drift_std)
        self.burst_amplitude = float(burst_amplitude)
        self.burst_frequency = float(burst_frequency)
        self.burst_period = int(burst_period)
        self.burst_window = tuple(burst_window)
        self.noise_std = float(noise_std)

        self.center = center.copy()
        self.noise = 0.0

    def _begin_round(self, t: int) -> None:
        if self.schedule == "explicit":
            self.center = self.centers[t % len(self.centers)].copy()
        elif self.schedule == "drift" and t > 0:
            self.center = self.center + self.drift_std * self.rng.standard_normal(self.dimension)
        elif self.schedule == "burst":
            phase = t % self.burst_period
            shift = 0.0
            if self.burst_window[0] <= phase <= self.burst_window[1]:
                shift = self.burst_amplitude * math.sin(self.burst_frequency * phase)
            self.center = self.initial_center + shift
        self.noise = self.noise_std * self.rng.standard_normal() if self.noise_std > 0 else 0.0

    def _loss(self, x: np.ndarray) -> float:
        r = x - self.center
        return float(r @ self.curvature @ r) + self.noise

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        return (self.curvature + self.curvature.T) @ (x - self.center)

    def quadratic_form(self) -> Tuple[np.ndarray, np.ndarray]:
        """잡음 없는 라운드 손실의 (Hessian, 원점에서의 기울기)."""
        hessian = self.curvature + self.curvature.T
        return hessian, -hessian @ self.center


# ----- 온라인 선형 회귀 -----

class LinearRegressionOracle(LossOracle):
    """
    f_t(x) = (1/2p) ||y - θx||^2 + z_t,  z_t ~ N(0, z_std^2) 는 라운드마다 한 번 뽑는다.

    θ 의 첫 열은 1 (절편), 나머지 열은 N(0, theta_std^2).
    y = intercept + slope * (θ 의 나머지 열 합) + N(0, target_noise_std^2).
    """

    has_true_gradient = True

    def __init__(self, rng: np.random.Generator, samples: int = 100, dimension: int = 2,
                 theta_std: float = 2.0, intercept: float = 4.0, slope: float = 3.0,
                 target_noise_std: float = 1.0, z_std: float = 1.0,
                 theta: Optional[np.ndarray] = None, target: Optional[np.ndarray] = None):
        if theta is not None:
            theta = np.asarray(theta, dtype=float)
            samples, dimension = theta.shape
        super().__init__(dimension, rng)
        if samples < 1:
            raise InvalidConfig(f"sample count must be >= 1, got {samples}")
        self.samples = int(samples)
        self.z_std = float(z_std)

        if theta is None:
            theta = np.empty((self.samples, self.dimension))
            theta[:, 0] = 1.0
            theta[:, 1:] = theta_std * rng.standard_normal((self.samples, self.dimension - 1))
        if target is None:
            s = target_noise_std * rng.standard_normal(self.samples)
            target = intercept + slope * theta[:, 1:].sum(axis=1) + s
        self.theta = theta
        self.target = np.asarray(target, dtype=float)
        if self.target.shape != (self.samples,):
            raise InvalidConfig("target length does not match the sample count")
        self.noise = 0.0

    def _begin_round(self, t: int) -> None:
        self.noise = self.z_std * self.rng.standard_normal() if self.z_std > 0 else 0.0

    def _loss(self, x: np.ndarray) -> float:
        r = self.target - self.theta @ x
        return float(r @ r) / (2.0 * self.samples) + self.noise

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        return -self.theta.T @ (self.target - self.theta @ x) / self.samples

    def quadratic_form(self) -> Tuple[np.ndarray, np.ndarray]:
        hessian = self.theta.T @ self.theta / self.samples
        return hessian, -self.theta.T @ self.target / self.samples


# ----- 비정상(non-stationary) LQR -----

class LQROracle(LossOracle):
    """
    정책 K (p×n, 평탄화해서 d = p·n) 의 할인된 rollout 비용.

        f_t(K) = c · mean_{x_init ∈ panel} (1/H) Σ_{k=1..H} β^k x_k^T (Q + K^T R K) x_k
        x_1 = x_init,  x_{k+1} = (Ā_t + B̄_t K) x_k

    dynamics="burst" 이면 A_t, B_t 가 다음 점화식을 따른다 (phase = t mod period):
      - phase == 0          : A_t = s_t,                 s_t ~ N(0, reset_std^2)
      - phase ∈ burst_window: A_t = A_{t-1} + s_t + amp·sin(freq·phase)
      - 그 외                : A_t = A_{t-1} + s_t,         s_t ~ N(0, step_std^2)
    B_t 는 sin 대신 cos 를 쓴다. rollout 에는 Ā_t = dynamics_scale·A_t, B̄_t = dynamics_scale·B_t 를 쓴다.
    burst 누적항은 성분당 최대 약 20 (스펙트럼 노름 약 120) 까지 커지므로
    기본 dynamics_scale 0.008 은 burst 이후에도 ||Ā_t|| 를 1 근처로 유지한다.
    c = cost_scale. dynamics="fixed" 이면 주어진 A, B 를 그대로 쓴다.

    비용이 cost_cap 을 넘으면 cost_cap 을 돌려주고 capped_evaluations 를 센다.
    value_cap 으로 상한을 노출해서 lazy 규칙이 포화된 값을 재사용하지 않게 한다.
    """

    def __init__(self, rng: np.random.Generator, state_dim: int = 6, control_dim: int = 6,
                 state_cost: Optional[np.ndarray] = None, control_cost: Optional[np.ndarray] = None,
                 discount: float = 0.5, rollout_len: int = 10, panel_size: int = 1,
                 cost_cap: float = 1e8, cost_scale: float = 10.0, dynamics: str = "burst",
                 dynamics_scale: float = 0.008, burst_period: int = 100,
                 burst_window: Tuple[int, int] = (35, 65), burst_amplitude: float = 7.0,
                 burst_frequency: float = 7.0, reset_std: float = 1.0, step_std: float = 0.1,
                 A: Optional[np.ndarray] = None, B: Optional[np.ndarray] = None,
                 initial_states: Optional[np.ndarray] = None):
        n, p = int(state_dim), int(control_dim)
        super().__init__(n * p, rng)
        if not 0.0 < discount < 1.0:
            raise InvalidConfig(f"discount must lie in (0, 1), got {discount}")
        if rollout_len < 1:
            raise InvalidConfig(f"rollout_len must be >= 1, got {rollout_len}")
        if dynamics not in ("burst", "fixed"):
            raise InvalidConfig(f"unknown LQR dynamics: {dynamics!r}")
        if dynamics == "fixed" and (A is None or B is None):
            raise InvalidConfig("fixed LQR dynamics need explicit A and B")
        if not cost_scale > 0 or not dynamics_scale > 0:
            raise InvalidConfig("cost_scale and dynamics_scale must be > 0")

        self.state_dim, self.control_dim = n, p
        self.state_cost = np.eye(n) if state_cost is None else np.asarray(state_cost, dtype=float)
        self.control_cost = np.eye(p) if control_cost is None else np.asarray(control_cost, dtype=float)
        self.discount = float(discount)
        self.rollout_len = int(rollout_len)
        self.cost_cap = float(cost_cap)
        self.value_cap = self.cost_cap
        self.cost_scale = float(cost_scale)
        self.dynamics = dynamics
        self.dynamics_scale = float(dynamics_scale)
        self.burst_period = int(burst_period)
        self.burst_window = tuple(burst_window)
        self.burst_amplitude = float(burst_amplitude)
        self.burst_frequency = float(burst_frequency)
        self.reset_std = float(reset_std)
        self.step_std = float(step_std)
        self.capped_evaluations = 0

        # 초기 상태 패널은 실행당 한 번만 뽑는다 (모든 estimator 가 같은 패널 공유)
        if initial_states is None:
            initial_states = rng.standard_normal((int(panel_size), n))
        self.initial_states = np.atleast_2d(np.asarray(initial_states, dtype=float))
        if self.initial_states.shape[1] != n:
            raise InvalidConfig("initial states must have state_dim columns")

        self.A = None if A is None else np.asarray(A, dtype=float)
        self.B = None if B is None else np.asarray(B, dtype=float)
        self._discounts = self.discount ** np.arange(1, self.rollout_len + 1)

    def _begin_round(self, t: int) -> None:
        if self.dynamics == "fixed":
            return
        n, p = self.state_dim, self.control_dim
        phase = t % self.burst_period
        if phase == 0:
            self.A = self.reset_std * self.rng.standard_normal((n, n))
            self.B = self.reset_std * self.rng.standard_normal((n, p))
            return
        s_a = self.step_std * self.rng.standard_normal((n, n))
        s_b = self.step_std * self.rng.standard_normal((n, p))
        if self.burst_window[0] <= phase <= self.burst_window[1]:
            s_a = s_a + self.burst_amplitude * math.sin(self.burst_frequency * phase)
            s_b = s_b + self.burst_amplitude * math.cos(self.burst_frequency * phase)
        self.A = self.A + s_a
        self.B = self.B + s_b

    def rollout_dynamics(self) -> Tuple[np.ndarray, np.ndarray]:
        """rollout 에 실제로 쓰는 (Ā_t, B̄_t)."""
        if self.dynamics == "fixed":
            return self.A, self.B
        return self.dynamics_scale * self.A, self.dynamics_scale * self.B

    def _loss(self, x: np.ndarray) -> float:
        K = x.reshape(self.control_dim, self.state_dim)
        A, B = self.rollout_dynamics()
        closed_loop = A + B @ K
        weight = self.state_cost + K.T @ self.control_cost @ K
        limit = self.cost_cap * self.rollout_len / self.cost_scale
        total = 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for x_init in self.initial_states:
                state = x_init
                acc = 0.0
                for beta_k in self._discounts:
                    acc += beta_k * float(state @ weight @ state)
                    if not math.isfinite(acc) or acc > limit:
                        break
                    state = closed_loop @ state
                total += acc / self.rollout_len
        cost = self.cost_scale * total / len(self.initial_states)
        if not math.isfinite(cost) or cost >= self.cost_cap:
            self.capped_evaluations += 1
            logger.debug("LQR cost capped at round %s", self.round)
            return self.cost_cap
        return max(cost, 0.0)


# ----- 자원 분배 -----

class ResourceAllocationOracle(LossOracle):
    """
    링 그래프 위 에이전트들의 자원 분배 정책 비용.

    각 에이전트 i 는 양쪽 이웃으로 보낼 비율 a^{ij} 를 정책으로 정한다.
    정책: 특징 [y_k^i, b_k^i, 1] 의 선형 결합 → 이웃별 logistic → 합이 1 을 넘으면 정규화.
    파라미터 shape 는 (agents, 2, 3) 이고 평탄화해서 d = 6·agents.

      y_{k+1}^i = y_k^i - Σ_j a_k^{ij} y_k^i + Σ_j a_k^{ji} y_k^j - b_k^i
      r_k^i     = 0 (y_k^i >= 0),  p_t^i (y_k^i)^2 (그 외)
      f_t(θ)    = Σ_i Σ_{k=1..H} β^k r_k^i
      p_t^i     = sin(π t / 12) + U[0, 1]   (라운드마다 고정)
    """

    FEATURES = 3
    NEIGHBORS = 2

    def __init__(self, rng: np.random.Generator, agents: int = 16, discount: float = 0.75,
                 rollout_len: int = 10, initial_workload: float = 1.0,
                 psi_range: Tuple[float, float] = (0.5, 1.5), omega_range: Tuple[float, float] = (0.1, 0.5),
                 phi_range: Tuple[float, float] = (0.0, 2.0 * math.pi), penalty_period: float = 12.0,
                 penalty_noise: Tuple[float, float] = (0.0, 1.0)):
        if agents < 3:
            raise InvalidConfig(f"a ring needs at least 3 agents, got {agents}")
        super().__init__(int(agents) * self.NEIGHBORS * self.FEATURES, rng)
        if not 0.0 < discount < 1.0:
            raise InvalidConfig(f"discount must lie in (0, 1), got {discount}")
        self.agents = int(agents)
        self.discount = float(discount)
        self.rollout_len = int(rollout_len)
        self.initial_workload = np.broadcast_to(
            np.asarray(initial_workload, dtype=float), (self.agents,)).copy()
        self.penalty_period = float(penalty_period)
        self.penalty_noise = tuple(penalty_noise)

        idx = np.arange(self.agents)
        # 이웃 슬롯 0 = 왼쪽, 1 = 오른쪽
        self.neighbors = np.stack([(idx - 1) % self.agents, (idx + 1) % self.agents], axis=1)

        # 수요 파라미터는 실행당 한 번만 뽑는다
        self.psi = rng.uniform(*psi_range, size=self.agents)
        self.omega = rng.uniform(*omega_range, size=self.agents)
        self.phi = rng.uniform(*phi_range, size=self.agents)
        self.penalty = np.zeros(self.agents)

    def demand(self, k: int) -> np.ndarray:
        return self.psi * np.sin(self.omega * k + self.phi)

    def forwarding(self, params: np.ndarray, workload: np.ndarray, demand: np.ndarray) -> np.ndarray:
        """에이전트별 이웃 전달 비율 (agents, 2). 각 행의 합은 1 이하."""
        features = np.stack([workload, demand, np.ones(self.agents)], axis=1)
        logits = np.einsum("inf,if->in", params, features)
        shares = np.exp(-np.logaddexp(0.0, -logits))
        total = shares.sum(axis=1, keepdims=True)
        return shares / np.maximum(1.0, total)

    def _begin_round(self, t: int) -> None:
        self.penalty = math.sin(math.pi * t / self.penalty_period) + self.rng.uniform(
            *self.penalty_noise, size=self.agents)

    def _loss(self, x: np.ndarray) -> float:
        params = x.reshape(self.agents, self.NEIGHBORS, self.FEATURES)
        workload = self.initial_workload.copy()
        cost = 0.0
        for k in range(self.rollout_len):
            demand = self.demand(k)
            fractions = self.forwarding(params, workload, demand)
            sent = fractions * workload[:, None]
            inflow = np.zeros(self.agents)
            np.add.at(inflow, self.neighbors, sent)
            workload = workload - sent.sum(axis=1) + inflow - demand
            shortfall = np.where(workload >= 0.0, 0.0, self.penalty * workload ** 2)
            cost += self.discount ** (k + 1) * float(shortfall.sum())
        return cost


# ----- 문제 설정 / 팩토리 -----

@dataclass(frozen=True)
class ProblemConfig:
    """
    문제 id + 생성 파라미터.

    params 는 oracle 생성자 키워드 인자 그대로이며, settings.LAZO["problems"] 의
    기본값 위에 덮어쓴다 (specs.normalize_config 에서 병합).
    """

    name: str
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in PROBLEMS:
            raise InvalidConfig(f"unknown problem: {self.name!r} (expected one of {', '.join(PROBLEMS)})")


_ORACLES = {
    "quadratic": SyntheticQuadraticOracle,
    "regression": LinearRegressionOracle,
    "lqr": LQROracle,
    "resource_allocation": ResourceAllocationOracle,
}


def build_oracle(problem: ProblemConfig, seed: int, trial: int = 0) -> LossOracle:
    """
    (problem, seed, trial) 로 oracle 을 만든다.

    같은 인자로 다시 호출하면 같은 손실 시퀀스를 재생(replay)하므로
    진단 모듈은 이 함수를 replay 핸들로 쓴다.
    """
    rng = make_rng(seed, trial, "oracle")
    params = dict(problem.params)
    for key in ("initial_states", "A", "B", "state_cost", "control_cost", "curvature", "theta", "target"):
        if params.get(key) is not None:
            params[key] = np.asarray(params[key], dtype=float)
    try:
        return _ORACLES[problem.name](rng, **params)
    except TypeError as exc:
        raise InvalidConfig(f"bad parameters for problem {problem.name!r}: {exc}") from exc
