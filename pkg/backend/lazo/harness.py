# lazo/harness.py
"""
시행(trial) 오케스트레이션과 집계.

- run_trials : (RunConfig, trial) 들을 워커 풀에서 실행 (--jobs)
- aggregate  : 라운드별 시행 평균/표준편차 (집계 CSV 용)
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from .optimizer import RunConfig, Trajectory, run

logger = logging.getLogger(__name__)


def _run_one(args) -> Trajectory:
    config, trial, snapshot_rounds = args
    return run(config, trial, snapshot_rounds)


def run_trials(config: RunConfig, trials: Optional[int] = None, jobs: int = 1,
               snapshot_rounds: Sequence[int] = ()) -> List[Trajectory]:
    """
    trial 0..N-1 을 실행해서 trial 순서대로 돌려준다.

    jobs > 1 이면 프로세스 풀을 쓴다. 각 워커가 자기 oracle/estimator/난수 스트림을
    소유하므로 결과는 jobs 값과 무관하다.
    """
    trials = config.trials if trials is None else trials
    work = [(config, trial, tuple(snapshot_rounds)) for trial in range(trials)]
    if jobs <= 1 or trials == 1:
        return [_run_one(item) for item in work]
    logger.info("running %d trials of %s on %d workers", trials, config.name, jobs)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, work))


def aggregate(trajectories: Sequence[Trajectory]) -> List[Dict[str, float]]:
    """
    라운드 t 마다 시행 평균.

    반환 행: t, loss_mean, loss_std, queries_mean, cum_queries_mean
    """
    if not trajectories:
        return []
    rounds = min(len(tr.records) for tr in trajectories)
    losses = np.array([[r.loss for r in tr.records[:rounds]] for tr in trajectories])
    queries = np.array([[r.queries for r in tr.records[:rounds]] for tr in trajectories], dtype=float)
    cum = np.array([[r.cum_queries for r in tr.records[:rounds]] for tr in trajectories], dtype=float)
    ddof = 1 if len(trajectories) > 1 else 0
    loss_std = losses.std(axis=0, ddof=ddof)
    rows = []
    for t in range(rounds):
        rows.append({
            "t": t,
            "loss_mean": float(losses[:, t].mean()),
            "loss_std": float(loss_std[t]),
            "queries_mean": float(queries[:, t].mean()),
            "cum_queries_mean": float(cum[:, t].mean()),
        })
    return rows


def final_summary(trajectories: Sequence[Trajectory]) -> Dict[str, float]:
    """sweep 한 격자점의 요약: 최종 손실 평균/표준편차, 총 질의 수 평균."""
    finals = np.array([tr.final_loss for tr in trajectories])
    totals = np.array([tr.total_queries for tr in trajectories], dtype=float)
    return {
        "final_loss_mean": float(finals.mean()),
        "final_loss_std": float(finals.std(ddof=1)) if len(finals) > 1 else 0.0,
        "total_queries_mean": float(totals.mean()),
    }
