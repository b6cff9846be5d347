# lazo/export.py
"""
실험 결과를 CSV 로 내보내는 모듈.

- trajectory CSV : trial, t, loss, cum_queries, queries_this_round, rule_fired, variation, est_sq_norm
- aggregate CSV  : t, loss_mean, loss_std, queries_mean, cum_queries_mean
- summary CSV    : trial, final_loss, total_queries, oracle_checksum (짝지은 시드 확인용), duration, capped_evaluations
- bounds / errors / symmetry / variance / sweep CSV

실수는 최단 왕복(round-trip) 10진 표현(repr)으로 쓴다. 값이 없으면 빈 칸.
"""
from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .diagnostics import BoundReport, SymmetryReport, VarianceTrace
from .optimizer import Trajectory

logger = logging.getLogger(__name__)

TRAJECTORY_FIELDS = ["trial", "t", "loss", "cum_queries", "queries_this_round", "rule_fired",
                     "variation", "est_sq_norm"]
AGGREGATE_FIELDS = ["t", "loss_mean", "loss_std", "queries_mean", "cum_queries_mean"]
SUMMARY_FIELDS = ["trial", "final_loss", "total_queries", "oracle_checksum", "duration", "capped_evaluations"]
BOUND_FIELDS = ["label", "trial", "rounds_checked", "bound_violations", "degenerate_rounds",
                "reduced_norm_premise_rounds", "reduced_norm_violations"]
ERROR_TRACE_FIELDS = ["label", "trial", "t", "variation", "estimation_error"]
SWEEP_FIELDS = ["label", "threshold", "step_size", "delta", "final_loss_mean", "final_loss_std",
                "total_queries_mean"]
SYMMETRY_SUMMARY_FIELDS = ["label", "round", "samples", "member_fraction", "asymmetry_score"]
VARIANCE_FIELDS = ["trial", "t", "samples", "mean_sq_norm", "norm_variance"]


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write(path: Path, fieldnames: List[str], rows: Iterable[Dict[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_value(v) for k, v in row.items()})
    logger.debug("wrote %s", path)
    return path


# ----- trajectory -----

def trajectory_rows(trajectory: Trajectory) -> List[Dict[str, Any]]:
    return [
        {
            "trial": trajectory.trial,
            "t": r.t,
            "loss": float(r.loss),
            "cum_queries": r.cum_queries,
            "queries_this_round": r.queries,
            "rule_fired": r.rule_fired,
            "variation": None if r.variation is None else float(r.variation),
            "est_sq_norm": float(r.est_sq_norm),
        }
        for r in trajectory.records
    ]


def write_trajectory_csv(path, trajectory: Trajectory) -> Path:
    return _write(path, TRAJECTORY_FIELDS, trajectory_rows(trajectory))


def _optional_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def read_trajectory_csv(path) -> List[Dict[str, Any]]:
    """trajectory CSV 를 trajectory_rows() 와 같은 형태의 dict 목록으로 되읽는다."""
    with Path(path).open(encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != TRAJECTORY_FIELDS:
            raise ValueError(f"{path}: unexpected trajectory header {reader.fieldnames}")
        return [
            {
                "trial": int(row["trial"]),
                "t": int(row["t"]),
                "loss": float(row["loss"]),
                "cum_queries": int(row["cum_queries"]),
                "queries_this_round": int(row["queries_this_round"]),
                "rule_fired": row["rule_fired"],
                "variation": _optional_float(row["variation"]),
                "est_sq_norm": float(row["est_sq_norm"]),
            }
            for row in reader
        ]


# ----- 집계 / 요약 -----

def write_aggregate_csv(path, rows: Sequence[Dict[str, float]]) -> Path:
    return _write(path, AGGREGATE_FIELDS, rows)


def write_summary_csv(path, trajectories: Sequence[Trajectory]) -> Path:
    rows = [
        {
            "trial": tr.trial,
            "final_loss": float(tr.final_loss),
            "total_queries": tr.total_queries,
            "oracle_checksum": tr.oracle_checksum,
            "duration": float(tr.duration),
            "capped_evaluations": tr.capped_evaluations,
        }
        for tr in trajectories
    ]
    return _write(path, SUMMARY_FIELDS, rows)


def write_variance_csv(path, rows: Sequence[Dict[str, Any]]) -> Path:
    return _write(path, VARIANCE_FIELDS, rows)


def variance_row(trial: int, t: int, trace: VarianceTrace) -> Dict[str, Any]:
    return {"trial": trial, "t": t, "samples": trace.samples,
            "mean_sq_norm": trace.mean_sq_norm, "norm_variance": trace.norm_variance}


# ----- 검증 -----

def write_bound_report_csv(path, label: str, reports: Sequence[BoundReport]) -> Path:
    """trial 별 BoundReport 한 행. MC 2차 모멘트/통계는 mc_<variant>, stat_<name> 열로."""
    extra = []
    for report in reports:
        for key in report.second_moments:
            if f"mc_{key}" not in extra:
                extra.append(f"mc_{key}")
        for key in report.statistics:
            if f"stat_{key}" not in extra:
                extra.append(f"stat_{key}")
    rows = []
    for trial, report in enumerate(reports):
        row = {
            "label": label,
            "trial": trial,
            "rounds_checked": report.rounds_checked,
            "bound_violations": report.bound_violations,
            "degenerate_rounds": report.degenerate_rounds,
            "reduced_norm_premise_rounds": report.reduced_norm_premise_rounds,
            "reduced_norm_violations": report.reduced_norm_violations,
        }
        row.update({f"mc_{k}": float(v) for k, v in report.second_moments.items()})
        row.update({f"stat_{k}": float(v) for k, v in report.statistics.items()})
        rows.append(row)
    return _write(path, BOUND_FIELDS + extra, rows)


ErrorTrace = Sequence[Tuple[int, Optional[float], float]]


def write_error_trace_csv(path, label: str, traces: Sequence[Tuple[int, ErrorTrace]]) -> Path:
    """(trial, estimation_error_trace 결과) 쌍 목록을 라운드별 한 행으로."""
    rows = [
        {"label": label, "trial": trial, "t": t, "variation": None if variation is None else float(variation),
         "estimation_error": float(error)}
        for trial, trace in traces
        for t, variation, error in trace
    ]
    return _write(path, ERROR_TRACE_FIELDS, rows)


# ----- 대칭성 -----

def write_symmetry_csv(path, report: SymmetryReport) -> Path:
    """
    샘플별 한 행: 소속 여부 + 투영 행렬마다 2차원 좌표 (p{j}_x, p{j}_y).
    """
    fields = ["sample", "member"]
    for j, coords in enumerate(report.projections):
        fields += [f"p{j}_{axis}" for axis in ("x", "y")[: coords.shape[1]]]
    rows = []
    for i, flag in enumerate(report.membership):
        row: Dict[str, Any] = {"sample": i, "member": bool(flag)}
        for j, coords in enumerate(report.projections):
            for axis_index, axis in enumerate(("x", "y")[: coords.shape[1]]):
                row[f"p{j}_{axis}"] = float(coords[i, axis_index])
        rows.append(row)
    return _write(path, fields, rows)


def write_symmetry_summary_csv(path, rows: Sequence[Dict[str, Any]]) -> Path:
    return _write(path, SYMMETRY_SUMMARY_FIELDS, rows)


# ----- sweep -----

def write_sweep_csv(path, rows: Sequence[Dict[str, Any]]) -> Path:
    return _write(path, SWEEP_FIELDS, rows)
