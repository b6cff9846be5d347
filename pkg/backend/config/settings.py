"""
lazo-bench 프로젝트 전역 설정 파일.

- Django 는 management command(run, validate, sweep, diagnose_symmetry)와
  로깅/테스트 프레임워크 용도로만 쓴다. DB, HTTP 서버는 쓰지 않는다.
- 실험 기본값은 LAZO 딕셔너리 한 곳에 모은다.
  설정 파일(JSON)에 빠진 값은 여기 값으로 채워진다 (lazo/specs.py).
"""

import math
import os
from pathlib import Path

# BASE_DIR: backend/ 디렉터리 (config/ 상위)
BASE_DIR = Path(__file__).resolve().parent.parent

# management command 만 쓰므로 키는 형식상 필요할 뿐이다
SECRET_KEY = os.environ.get('LAZO_SECRET_KEY', 'lazo-bench-local')

DEBUG = os.environ.get('LAZO_DEBUG', '0') == '1'

ALLOWED_HOSTS = []

# 설치된 앱 목록
INSTALLED_APPS = [
    # local
    'lazo.apps.LazoConfig',  # 0차 최적화 라이브러리 + 벤치마크 CLI
]

# DB 를 쓰지 않는다 (결과는 CSV 로만 남긴다)
DATABASES = {}

USE_TZ = True


# ───────────── 로깅 설정 ─────────────

LOG_LEVEL = os.environ.get('LAZO_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} [{process:d}] {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'lazo': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}


# ───────────── 실험 기본값 ─────────────

LAZO = {
    # 실행/시드
    'DEFAULT_SEED': int(os.environ.get('LAZO_DEFAULT_SEED', '0')),
    # 독립 시행 횟수 (10회 평균)
    'DEFAULT_TRIALS': int(os.environ.get('LAZO_DEFAULT_TRIALS', '10')),
    'DEFAULT_JOBS': 1,

    # 문제별 oracle 생성 파라미터 (설정 파일 problem.params 가 위에 덮어쓴다)
    'PROBLEMS': {
        'quadratic': {
            'dimension': 4,
            'schedule': 'stationary',
            'noise_std': 0.0,
        },
        'regression': {
            'samples': 100,
            'dimension': 2,
            'theta_std': 2.0,
            'intercept': 4.0,
            'slope': 3.0,
            'target_noise_std': 1.0,
            'z_std': 1.0,
        },
        'lqr': {
            'state_dim': 6,
            'control_dim': 6,
            'discount': 0.5,
            # rollout 길이: 유한하고 싼 비용 평가를 위한 기본값
            'rollout_len': 10,
            'panel_size': 1,
            'cost_cap': 1e8,
            'cost_scale': 10.0,
            'dynamics': 'burst',
            # burst 누적항 (스펙트럼 노름 약 120) 이후에도 rollout 이 발산하지 않게 하는 배율
            'dynamics_scale': 0.008,
            'burst_period': 100,
            'burst_window': [35, 65],
            'burst_amplitude': 7.0,
            'burst_frequency': 7.0,
            'reset_std': 1.0,
            'step_std': 0.1,
        },
        'resource_allocation': {
            'agents': 16,
            'discount': 0.75,
            'rollout_len': 10,
            'initial_workload': 1.0,
            'psi_range': [0.5, 1.5],
            'omega_range': [0.1, 0.5],
            'phi_range': [0.0, 2.0 * math.pi],
        },
    },

    # 문제별 기본 가능 영역
    # - LQR / 자원 분배: 비볼록이므로 투영 없음
    # - 회귀: 반지름 100 공
    'FEASIBLE_SETS': {
        'quadratic': {'kind': 'unconstrained'},
        'regression': {'kind': 'ball', 'radius': 100.0},
        'lqr': {'kind': 'unconstrained'},
        'resource_allocation': {'kind': 'unconstrained'},
    },

    'ESTIMATOR': {
        'variant': 'lazo_a',
        'delta': 0.01,
        'threshold': math.inf,
        'lipschitz_scale': 1.0,
        'history_len': 1,
        'directions_per_round': 1,
    },

    'OPTIMIZER': {
        'horizon': 1000,
        'step_size': 1e-3,
        'x0': 'zero',
    },

    'DIAGNOSTICS': {
        # 대칭성 진단: 라운드 10, 방향 40000개, 2차원 랜덤 투영 4개
        'symmetry_rounds': [10],
        'symmetry_samples': 40000,
        'projections': 4,
        # 라운드별 estimator 분산 추적
        'variance_rounds': [],
        'variance_samples': 1000,
        # validate: 고전 estimator 2차 모멘트 MC 샘플 수 (0 이면 생략)
        'mc_samples': 0,
        # reduced-norm 조건 검사용 L (None 이면 생략)
        'lipschitz': None,
    },
}
