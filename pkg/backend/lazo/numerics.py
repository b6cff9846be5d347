# lazo/numerics.py
"""
수치 유틸리티 모듈.

- (seed, trial, purpose) 로 키잉되는 재현 가능한 난수 스트림
- 단위 구(sphere) 위 랜덤 방향 샘플링
- 가능 영역(feasible set) 투영
- 대칭성 진단에 쓰는 랜덤 저차원 투영 행렬
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import InvalidConfig, InvalidDimension

logger = logging.getLogger(__name__)

# 용도별 스트림 번호.
# 진단용 난수를 추가해도 최적화용 방향 스트림이 흔들리지 않도록 분리한다.
PURPOSES = {
    "directions": 1,
    "oracle": 2,
    "init": 3,
    "diagnostics": 4,
    "projection": 5,
}

# 투영 결과가 경계 위에 있는지 판단할 때 쓰는 상대 허용오차
_BALL_SLACK = 1e-12


# ----- 난수 스트림 -----

def make_rng(seed: int, trial: int = 0, purpose: str = "directions",
             stream: int = 0) -> np.random.Generator:
    """
    SeededRng 생성.

    counter 기반 Philox 비트 생성기를 SeedSequence(seed, spawn_key=(trial, purpose, stream))
    로 초기화한다. 같은 (seed, trial, purpose, stream) 이면 플랫폼과 무관하게
    같은 난수열이 나온다.
    """
    if purpose not in PURPOSES:
        raise InvalidConfig(f"unknown rng purpose: {purpose!r}")
    if seed < 0 or trial < 0 or stream < 0:
        raise InvalidConfig("seed, trial and stream must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial), PURPOSES[purpose], int(stream)))
    return np.random.Generator(np.random.Philox(ss))


# ----- 방향 샘플링 -----

def sample_unit_sphere(rng: np.random.Generator, d: int) -> np.ndarray:
    """정규분포 샘플을 정규화해서 S^{d-1} 위의 균일 방향을 뽑는다."""
    if d < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {d}")
    g = rng.standard_normal(d)
    norm = np.linalg.norm(g)
    # 확률 0 사건이지만 0 벡터가 나오면 다시 뽑는다
    while norm == 0.0:
        g = rng.standard_normal(d)
        norm = np.linalg.norm(g)
    return g / norm


def sample_unit_sphere_batch(rng: np.random.Generator, d: int, n: int) -> np.ndarray:
    """n 개의 단위 방향을 (n, d) 배열로 반환 (Monte-Carlo 진단용)."""
    if d < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {d}")
    if n < 0:
        raise InvalidConfig(f"sample count must be >= 0, got {n}")
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    zero = norms == 0.0
    while np.any(zero):
        g[zero] = rng.standard_normal((int(zero.sum()), d))
        norms = np.linalg.norm(g, axis=1)
        zero = norms == 0.0
    return g / norms[:, None]


def random_projection_matrix(rng: np.random.Generator, d: int, k: int) -> np.ndarray:
    """표준정규 성분을 가진 k×d 투영 행렬."""
    if d < 1 or k < 1:
        raise InvalidDimension(f"dimensions must be >= 1, got d={d}, k={k}")
    if k > d:
        raise InvalidDimension(f"projection dimension k={k} exceeds d={d}")
    return rng.standard_normal((k, d))


# ----- 가능 영역 -----

Bound = Union[float, Sequence[float]]


@dataclass(frozen=True)
class FeasibleSet:
    """
    가능 영역 X.

    - ball: 원점 중심, 반지름 radius 인 유클리드 공
    - box : 좌표별 [lower, upper]
    - unconstrained: 투영 없음 (비볼록 설정)
    """

    kind: str = "unconstrained"
    radius: Optional[float] = None
    lower: Optional[Bound] = None
    upper: Optional[Bound] = None

    def __post_init__(self):
        if self.kind == "ball":
            if self.radius is None or not self.radius > 0 or not math.isfinite(self.radius):
                raise InvalidConfig(f"ball radius must be a positive finite number, got {self.radius}")
        elif self.kind == "box":
            if self.lower is None or self.upper is None:
                raise InvalidConfig("box set needs both lower and upper bounds")
            if np.any(np.asarray(self.lower, dtype=float) > np.asarray(self.upper, dtype=float)):
                raise InvalidConfig("box lower bound exceeds upper bound")
        elif self.kind != "unconstrained":
            raise InvalidConfig(f"unknown feasible set kind: {self.kind!r}")

    @classmethod
    def ball(cls, radius: float) -> "FeasibleSet":
        return cls(kind="ball", radius=float(radius))

    @classmethod
    def box(cls, lower: Bound, upper: Bound) -> "FeasibleSet":
        return cls(kind="box", lower=_freeze(lower), upper=_freeze(upper))

    @classmethod
    def unconstrained(cls) -> "FeasibleSet":
        return cls(kind="unconstrained")

    @property
    def is_constrained(self) -> bool:
        return self.kind != "unconstrained"

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            return bool(np.linalg.norm(x) <= self.radius * (1.0 + tol))
        if self.kind == "box":
            lo = np.asarray(self.lower, dtype=float)
            hi = np.asarray(self.upper, dtype=float)
            return bool(np.all(x >= lo - tol) and np.all(x <= hi + tol))
        return True

    def project(self, x: np.ndarray) -> np.ndarray:
        return project(x, self)


def _freeze(bound: Bound):
    if np.ndim(bound) == 0:
        return float(bound)
    return tuple(float(v) for v in bound)


def project(x: np.ndarray, feasible_set: FeasibleSet) -> np.ndarray:
    """
    x 를 가능 영역 위 가장 가까운 점으로 유클리드 투영한다.

    공 투영은 경계 근처에서 상대 오차 1e-12 까지 내부로 취급해서
    project(project(x)) == project(x) 가 비트 단위로 성립하게 한다.
    """
    x = np.asarray(x, dtype=float)
    if feasible_set.kind == "ball":
        norm = np.linalg.norm(x)
        if norm <= feasible_set.radius * (1.0 + _BALL_SLACK):
            return x.copy()
        return x * (feasible_set.radius / norm)
    if feasible_set.kind == "box":
        return np.clip(x, np.asarray(feasible_set.lower, dtype=float),
                       np.asarray(feasible_set.upper, dtype=float))
    return x.copy()


def sample_in_set(rng: np.random.Generator, feasible_set: FeasibleSet, d: int) -> np.ndarray:
    """랜덤 초기점. 공은 균일 분포, 박스는 좌표별 균일, 제약 없음은 표준정규."""
    if d < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {d}")
    if feasible_set.kind == "ball":
        u = sample_unit_sphere(rng, d)
        r = feasible_set.radius * rng.uniform() ** (1.0 / d)
        return r * u
    if feasible_set.kind == "box":
        lo = np.broadcast_to(np.asarray(feasible_set.lower, dtype=float), (d,))
        hi = np.broadcast_to(np.asarray(feasible_set.upper, dtype=float), (d,))
        return rng.uniform(lo, hi)
    return rng.standard_normal(d)
