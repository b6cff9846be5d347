# lazo/estimators.py
"""
0차(zeroth-order) 기울기 추정기와 lazy query 규칙.

- one_point      : (d/δ) u f_t(x+δu)
- residual       : (d/δ) u (f_t(w_t) - f_{t-1}(w_{t-1}))
- two_point_asym : (d/δ) u (f_t(x+δu) - f_t(x))
- two_point_sym  : (d/2δ) u (f_t(x+δu) - f_t(x-δu))
- lazo_a/lazo_b  : residual 을 쓰다가 temporal variation 이 D 를 넘으면 대칭 2점으로 전환
- multi_*        : 최근 H 라운드 × K 방향의 과거 질의를 재사용하는 2K 점 버전

lazy 계열 estimator 는 QueryCache 에 과거 (u, w, f(w)) 를 값으로만 저장한다.
재사용 항은 순수 조회라서 재사용 라운드의 비용은 정확히 질의 1회다.
"""
from __future__ import annotations

import copy
import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DegenerateInput, InvalidConfig, SequencingError
from .numerics import sample_unit_sphere

logger = logging.getLogger(__name__)

VARIANTS = (
    "one_point",
    "residual",
    "two_point_asym",
    "two_point_sym",
    "lazo_a",
    "lazo_b",
    "multi_lazo_a",
    "multi_lazo_b",
    "multi_point_sym",
)

# rule_fired 값
FRESH_ONE_POINT = "fresh_one_point"
FRESH_TWO_POINT = "fresh_two_point"
REUSED = "reused"
MIXED = "mixed"

# 두 점이 "같은 점"으로 취급되는 거리
COINCIDENT_TOL = 1e-12


@dataclass(frozen=True)
class EstimatorConfig:
    """
    estimator 설정.

    rule b 는 |Δf| / (η · lipschitz_scale) <= threshold 로 판단한다.
    실제로 결과를 좌우하는 것은 threshold · lipschitz_scale 곱 (D·L) 뿐이다.
    """

    variant: str
    delta: float
    threshold: float = math.inf
    lipschitz_scale: float = 1.0
    history_len: int = 1
    directions_per_round: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidConfig(f"unknown estimator variant: {self.variant!r}")
        if not self.delta > 0 or not math.isfinite(self.delta):
            raise InvalidConfig(f"delta must be a positive finite number, got {self.delta}")
        if math.isnan(self.threshold) or self.threshold < 0:
            raise InvalidConfig(f"threshold must be >= 0 or +inf, got {self.threshold}")
        if not self.lipschitz_scale > 0:
            raise InvalidConfig(f"lipschitz_scale must be > 0, got {self.lipschitz_scale}")
        if self.history_len < 1 or self.directions_per_round < 1:
            raise InvalidConfig("history_len and directions_per_round must both be >= 1")

    @property
    def rule(self) -> Optional[str]:
        if self.variant in ("lazo_a", "multi_lazo_a"):
            return "a"
        if self.variant in ("lazo_b", "multi_lazo_b"):
            return "b"
        return None

    @property
    def is_multipoint(self) -> bool:
        return self.variant.startswith("multi_")

    @property
    def bootstrap_rounds(self) -> int:
        if self.variant in ("residual", "lazo_a", "lazo_b"):
            return 1
        if self.variant in ("multi_lazo_a", "multi_lazo_b"):
            return self.history_len
        return 0


@dataclass
class GradientEstimate:
    """
    한 라운드의 기울기 추정 결과.

    point / point_value 는 단일 방향 estimator 의 w_t, f_t(w_t) (검증용).
    """

    vector: np.ndarray
    queries_used: int
    rule_fired: str
    variation_observed: Optional[float] = None
    reused_count: int = 0
    fresh_count: int = 0
    point: Optional[np.ndarray] = None
    point_value: Optional[float] = None

    @property
    def sq_norm(self) -> float:
        return float(self.vector @ self.vector)

    @property
    def rule_label(self) -> str:
        if self.rule_fired == MIXED:
            return f"{MIXED}({self.reused_count},{self.fresh_count})"
        return self.rule_fired


# ----- 질의 캐시 -----

@dataclass(frozen=True)
class CacheEntry:
    direction: np.ndarray
    point: np.ndarray
    value: float

    @classmethod
    def at(cls, x: np.ndarray, direction: np.ndarray, delta: float, value: float) -> "CacheEntry":
        return cls(direction=direction, point=x + delta * direction, value=float(value))


class QueryCache:
    """
    최근 H 라운드의 (u, w, f(w)) 를 담는 링 버퍼. 라운드당 최대 K 개.

    last_sq_norm 은 직전 라운드 추정치의 ||g̃||^2 (bound 검증용).
    bootstrap 전에는 None 이다.
    """

    def __init__(self, history_len: int = 1, directions_per_round: int = 1):
        self.history_len = int(history_len)
        self.directions_per_round = int(directions_per_round)
        self._rounds: deque = deque(maxlen=self.history_len)
        self.last_sq_norm: Optional[float] = None

    def __len__(self) -> int:
        return len(self._rounds)

    @property
    def bootstrapped(self) -> bool:
        return len(self._rounds) > 0

    def push(self, entries: Sequence[CacheEntry], sq_norm: float) -> None:
        if not entries or len(entries) > self.directions_per_round:
            raise InvalidConfig(
                f"a round stores 1..{self.directions_per_round} entries, got {len(entries)}")
        # 가장 최근 라운드가 왼쪽 (τ = 1)
        self._rounds.appendleft(tuple(entries))
        self.last_sq_norm = float(sq_norm)

    def latest(self) -> CacheEntry:
        if not self._rounds:
            raise SequencingError("query cache is empty; run a bootstrap round first")
        return self._rounds[0][0]

    def lookback(self) -> Iterator[Tuple[int, int, CacheEntry]]:
        """(τ, l, entry) 를 τ = 1..H, l = 1..(기록된 개수) 순서로."""
        for tau, entries in enumerate(self._rounds, start=1):
            for l, entry in enumerate(entries, start=1):
                yield tau, l, entry

    def copy(self) -> "QueryCache":
        return copy.deepcopy(self)


# ----- temporal variation -----

def temporal_variation_a(f_now: float, f_prev: float, w_now, w_prev) -> float:
    """D^a = |f_t(x) - f_{t-1}(y)| / ||x - y||. 겹친 점은 값이 같으면 0, 다르면 +inf."""
    diff = abs(f_now - f_prev)
    dist = float(np.linalg.norm(np.asarray(w_now, dtype=float) - np.asarray(w_prev, dtype=float)))
    if dist < COINCIDENT_TOL:
        return 0.0 if diff < COINCIDENT_TOL else math.inf
    return diff / dist


def temporal_variation_b(f_now: float, f_prev: float, eta: float, lipschitz: float) -> float:
    """D^b = |f_t(x) - f_{t-1}(y)| / (η L)."""
    scale = eta * lipschitz
    if not scale > 0:
        raise InvalidConfig(f"eta * lipschitz must be > 0, got {scale}")
    return abs(f_now - f_prev) / scale


def _variation(config: EstimatorConfig, f_now, f_prev, w_now, w_prev, eta,
               cap: Optional[float] = None) -> float:
    # 상한에서 잘린 값끼리의 차이는 실제 변화량을 알려주지 않는다
    if cap is not None and (f_now >= cap or f_prev >= cap):
        return math.inf
    if config.rule == "a":
        return temporal_variation_a(f_now, f_prev, w_now, w_prev)
    return temporal_variation_b(f_now, f_prev, eta, config.lipschitz_scale)


# ----- 벡터 공식 -----
# lazy 규칙과 고전 estimator 가 같은 산술식을 공유해야 퇴화 설정에서 비트 단위로 일치한다.

def _residual_vector(d: int, delta: float, u: np.ndarray, f_now: float, f_prev: float) -> np.ndarray:
    return (d / delta) * (f_now - f_prev) * u


def _symmetric_vector(d: int, delta: float, u: np.ndarray, f_plus: float, f_minus: float) -> np.ndarray:
    return (d / (2.0 * delta)) * (f_plus - f_minus) * u


# ----- 고전 estimator -----

def estimate_one_point(oracle, x: np.ndarray, u: np.ndarray, delta: float) -> GradientEstimate:
    d = len(x)
    w = x + delta * u
    value = oracle.query(w)
    return GradientEstimate((d / delta) * value * u, 1, FRESH_ONE_POINT, fresh_count=1,
                            point=w, point_value=value)


def estimate_two_point_asym(oracle, x: np.ndarray, u: np.ndarray, delta: float) -> GradientEstimate:
    d = len(x)
    w = x + delta * u
    f_plus = oracle.query(w)
    f_here = oracle.query(x)
    return GradientEstimate((d / delta) * (f_plus - f_here) * u, 2, FRESH_TWO_POINT, fresh_count=1,
                            point=w, point_value=f_plus)


def estimate_two_point_sym(oracle, x: np.ndarray, u: np.ndarray, delta: float) -> GradientEstimate:
    d = len(x)
    w = x + delta * u
    f_plus = oracle.query(w)
    f_minus = oracle.query(x - delta * u)
    return GradientEstimate(_symmetric_vector(d, delta, u, f_plus, f_minus), 2, FRESH_TWO_POINT,
                            fresh_count=1, point=w, point_value=f_plus)


def estimate_multipoint_symmetric(oracle, x: np.ndarray, rng: np.random.Generator, delta: float,
                                  directions: int) -> Tuple[GradientEstimate, List[CacheEntry]]:
    """
    2K 점 대칭 estimator: (d / 2δK) Σ_k u_k (f(x+δu_k) - f(x-δu_k)).

    캐시에 넣을 (u_k, w_k, f(w_k)) 목록도 함께 돌려준다.
    """
    d = len(x)
    total = np.zeros(d)
    entries = []
    for _ in range(directions):
        u = sample_unit_sphere(rng, d)
        w = x + delta * u
        f_plus = oracle.query(w)
        f_minus = oracle.query(x - delta * u)
        total += _symmetric_vector(d, delta, u, f_plus, f_minus)
        entries.append(CacheEntry(u, w, f_plus))
    estimate = GradientEstimate(total / directions, 2 * directions, FRESH_TWO_POINT,
                                fresh_count=directions, point=entries[0].point,
                                point_value=entries[0].value)
    return estimate, entries


def estimate_residual(oracle, x: np.ndarray, u: np.ndarray, delta: float, cache: QueryCache,
                      record: bool = True) -> GradientEstimate:
    """
    one-point residual estimator. 캐시에 직전 라운드의 (w, f(w)) 가 있어야 한다.

    record=False 이면 캐시를 갱신하지 않는다 (진단에서 같은 상태로 여러 번 샘플링할 때).
    """
    if not cache.bootstrapped:
        raise SequencingError("residual estimator needs a bootstrapped cache")
    d = len(x)
    prev = cache.latest()
    w = x + delta * u
    value = oracle.query(w)
    vector = _residual_vector(d, delta, u, value, prev.value)
    estimate = GradientEstimate(vector, 1, REUSED,
                                variation_observed=temporal_variation_a(value, prev.value, w, prev.point),
                                reused_count=1, point=w, point_value=value)
    if record:
        cache.push([CacheEntry(u, w, value)], estimate.sq_norm)
    return estimate


def bootstrap_two_point(oracle, x: np.ndarray, u: np.ndarray, delta: float,
                        cache: QueryCache) -> GradientEstimate:
    """lazy 계열 첫 라운드: 대칭 2점 추정 후 (u, w, f(w)) 로 캐시를 채운다."""
    estimate = estimate_two_point_sym(oracle, x, u, delta)
    cache.push([CacheEntry(u, estimate.point, estimate.point_value)], estimate.sq_norm)
    return estimate


# ----- LAZO -----

def lazo_step(oracle, x: np.ndarray, cache: QueryCache, config: EstimatorConfig,
              rng: np.random.Generator, eta: float, record: bool = True) -> GradientEstimate:
    """
    단일 점 LAZO 한 라운드.

    새 방향 u_t 로 f_t(w_t) 를 질의하고 직전 캐시 값과의 temporal variation 을 계산한다.
    variation <= D 이면 residual 추정(질의 1회), 아니면 f_t(x - δu_t) 를 추가 질의해서
    대칭 2점 추정(질의 2회)을 돌려준다.
    """
    if config.rule is None:
        raise InvalidConfig(f"variant {config.variant!r} has no lazy rule")
    if not cache.bootstrapped:
        raise SequencingError("lazo_step needs a bootstrapped cache (run the two-point round first)")
    d = len(x)
    delta = config.delta
    u = sample_unit_sphere(rng, d)
    w = x + delta * u
    value = oracle.query(w)
    prev = cache.latest()
    variation = _variation(config, value, prev.value, w, prev.point, eta, oracle.value_cap)

    if variation <= config.threshold:
        estimate = GradientEstimate(_residual_vector(d, delta, u, value, prev.value), 1, REUSED,
                                    variation_observed=variation, reused_count=1,
                                    point=w, point_value=value)
    else:
        f_minus = oracle.query(x - delta * u)
        estimate = GradientEstimate(_symmetric_vector(d, delta, u, value, f_minus), 2, FRESH_TWO_POINT,
                                    variation_observed=variation, fresh_count=1,
                                    point=w, point_value=value)
    if record:
        cache.push([CacheEntry(u, w, value)], estimate.sq_norm)
    return estimate


def multipoint_lazo_step(oracle, x: np.ndarray, cache: QueryCache, config: EstimatorConfig,
                         rng: np.random.Generator, eta: float, record: bool = True) -> GradientEstimate:
    """
    H×K 다중 점 LAZO 한 라운드.

    K 개의 슬롯이 찰 때까지 새 방향을 하나씩 뽑는다. 방향마다 f_t(w_t^k) 를 질의하고
    캐시의 (τ, l) 항목을 τ = 1..H, l = 1..K 순서로 훑어 variation <= D 인 항목마다
    (d/δ) u (f_t(w) - f_{t-τ}(w_{t-τ}^l)) 를 더하며 슬롯을 하나씩 쓴다.
    매칭이 하나도 없으면 f_t(x - δu) 를 질의해서 (d/2δ) 대칭 항을 더하고 슬롯 1개를 쓴다.
    마지막에 K 로 한 번 나눈다.
    """
    if config.rule is None:
        raise InvalidConfig(f"variant {config.variant!r} has no lazy rule")
    if not cache.bootstrapped:
        raise SequencingError("multipoint_lazo_step needs H bootstrapped rounds")
    d = len(x)
    delta = config.delta
    slots_total = config.directions_per_round
    total = np.zeros(d)
    entries: List[CacheEntry] = []
    slots = queries = reused = fresh = 0
    smallest = math.inf

    while slots < slots_total:
        u = sample_unit_sphere(rng, d)
        w = x + delta * u
        value = oracle.query(w)
        queries += 1
        entries.append(CacheEntry(u, w, value))

        matched = 0
        for _tau, _l, old in cache.lookback():
            if slots >= slots_total:
                break
            variation = _variation(config, value, old.value, w, old.point, eta, oracle.value_cap)
            smallest = min(smallest, variation)
            if variation <= config.threshold:
                total += _residual_vector(d, delta, u, value, old.value)
                slots += 1
                matched += 1

        if matched == 0:
            f_minus = oracle.query(x - delta * u)
            queries += 1
            total += _symmetric_vector(d, delta, u, value, f_minus)
            slots += 1
            fresh += 1
        else:
            reused += matched

    if reused and fresh:
        rule = MIXED
    elif reused:
        rule = REUSED
    else:
        rule = FRESH_TWO_POINT
    estimate = GradientEstimate(total / slots_total, queries, rule,
                                variation_observed=smallest,
                                reused_count=reused, fresh_count=fresh,
                                point=entries[0].point, point_value=entries[0].value)
    if record:
        cache.push(entries, estimate.sq_norm)
    return estimate


# ----- 이론 부등식 -----

def instance_bound_rhs(f_now: float, f_prev: float, w_now, w_prev, prev_estimate_sq_norm: float,
                       d: int, eta: float, delta: float) -> float:
    """
    instance-dependent bound 의 우변:

        |Δf|^2 / ||Δw||^2 · (8 d^2 + 2 d^2 η^2 / δ^2 · ||g̃_{t-1}||^2)
    """
    dist_sq = float(np.sum((np.asarray(w_now, dtype=float) - np.asarray(w_prev, dtype=float)) ** 2))
    if math.sqrt(dist_sq) < COINCIDENT_TOL:
        raise DegenerateInput("perturbed points coincide; the bound is vacuous")
    ratio = (f_now - f_prev) ** 2 / dist_sq
    return ratio * (8.0 * d ** 2 + 2.0 * d ** 2 * eta ** 2 / delta ** 2 * prev_estimate_sq_norm)


def reduced_norm_condition(f_now: float, f_prev: float, w_now, w_prev, prev_sq_norm: float,
                           d: int, lipschitz: float) -> bool:
    """reduced-norm 조건: ||g̃_{t-1}||^2 <= d^2 L^2 이고 |Δf|^2/||Δw||^2 < L^2 / (10 d)."""
    variation = temporal_variation_a(f_now, f_prev, w_now, w_prev)
    return bool(prev_sq_norm <= d ** 2 * lipschitz ** 2
                and variation ** 2 < lipschitz ** 2 / (10.0 * d))


# ----- 실행 단위 estimator -----

class GradientEstimator:
    """
    한 실행(run) 동안 쓰는 estimator. 설정과 캐시를 묶어서
    step() 하나로 모든 variant 를 같은 방식으로 호출하게 한다.
    """

    def __init__(self, config: EstimatorConfig):
        self.config = config
        self.cache = QueryCache(config.history_len, config.directions_per_round)
        self.rounds_seen = 0

    def step(self, oracle, x: np.ndarray, rng: np.random.Generator, eta: float,
             record: bool = True) -> GradientEstimate:
        cfg = self.config
        d = len(x)
        variant = cfg.variant

        if variant == "one_point":
            estimate = estimate_one_point(oracle, x, sample_unit_sphere(rng, d), cfg.delta)
        elif variant == "two_point_asym":
            estimate = estimate_two_point_asym(oracle, x, sample_unit_sphere(rng, d), cfg.delta)
        elif variant == "two_point_sym":
            estimate = estimate_two_point_sym(oracle, x, sample_unit_sphere(rng, d), cfg.delta)
        elif variant == "multi_point_sym":
            estimate, _ = estimate_multipoint_symmetric(oracle, x, rng, cfg.delta, cfg.directions_per_round)
        elif self.rounds_seen < cfg.bootstrap_rounds:
            estimate = self._bootstrap(oracle, x, rng, record)
        elif variant == "residual":
            estimate = estimate_residual(oracle, x, sample_unit_sphere(rng, d), cfg.delta, self.cache, record)
        elif cfg.is_multipoint:
            estimate = multipoint_lazo_step(oracle, x, self.cache, cfg, rng, eta, record)
        else:
            estimate = lazo_step(oracle, x, self.cache, cfg, rng, eta, record)

        if record:
            self.rounds_seen += 1
        return estimate

    def _bootstrap(self, oracle, x, rng, record) -> GradientEstimate:
        cfg = self.config
        if cfg.is_multipoint:
            estimate, entries = estimate_multipoint_symmetric(oracle, x, rng, cfg.delta,
                                                              cfg.directions_per_round)
            if record:
                self.cache.push(entries, estimate.sq_norm)
            return estimate
        u = sample_unit_sphere(rng, len(x))
        if not record:
            return estimate_two_point_sym(oracle, x, u, cfg.delta)
        return bootstrap_two_point(oracle, x, u, cfg.delta, self.cache)
