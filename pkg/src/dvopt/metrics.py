"""Residuals, consensus distances, potential diagnostics, serialization.

The optimal dual value is ``-phi_star`` where ``phi_star`` is the
centralized optimum of the separable objective (linear consensus
constraints, so strong duality holds); every residual here is measured
against that reference.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .algorithms import RunTrace, XSpaceTrace
from .linalg import fro_norm
from .objectives import AggregateObjective

__all__ = [
    "MetricRow",
    "PotentialRow",
    "BoundCheckReport",
    "compute_metrics",
    "agentwise_primal_gap",
    "potential_trace",
    "bound_check",
    "emit",
    "parse_csv",
    "CSV_HEADER",
]

CSV_HEADER = "iter,epoch,dual_value,dual_residual,consensus_dist,primal_gap,message_count"


@dataclass(frozen=True)
class MetricRow:
    iter: int
    epoch: int
    dual_value: float
    dual_residual: float
    consensus_dist: float
    primal_gap: float
    message_count: int


@dataclass(frozen=True)
class PotentialRow:
    """Potential value and its change at one iteration.

    ``psi`` is the weighted potential ``(1+gamma)^k * psi_scaled`` and
    ``delta_psi = psi(k+1) - psi(k)``; the ``*_scaled`` fields divide out
    the ``(1+gamma)^k`` growth so long horizons stay representable.
    ``change_bound_scaled`` carries, at epoch boundaries, the scaled
    admissible jump ``(1+gamma) (L-mu)/mu (f_k(y_{k+1}) - f_star)``.
    """

    iter: int
    psi: float
    delta_psi: float
    at_change: bool
    psi_scaled: float
    delta_psi_scaled: float
    change_bound_scaled: float | None = None


@dataclass(frozen=True)
class BoundCheckReport:
    clean: bool
    max_violation: float
    first_violation_iter: int | None
    checked: int


def compute_metrics(
    trace: RunTrace,
    agg: AggregateObjective,
    oracle: tuple[np.ndarray, float],
) -> list[MetricRow]:
    """Per-record residual metrics against the centralized oracle.

    ``oracle`` is ``(y_star, phi_star)`` from a high-accuracy centralized
    solve.  ``dual_residual`` is measured against ``f_star = -phi_star``
    and ``primal_gap`` evaluates the aggregate at the agent-average of
    the primal candidates.
    """
    y_star, phi_star = oracle
    f_star = -float(phi_star)
    rows = []
    for rec in trace.records:
        y_tilde = rec.y_tilde
        if y_tilde is None or not np.all(np.isfinite(y_tilde)):
            rows.append(
                MetricRow(
                    iter=rec.iter,
                    epoch=rec.epoch,
                    dual_value=rec.dual_value,
                    dual_residual=math.inf if math.isfinite(f_star) else math.nan,
                    consensus_dist=rec.consensus_dist,
                    primal_gap=math.inf,
                    message_count=rec.message_count,
                )
            )
            continue
        y_bar = y_tilde.mean(axis=1)
        rows.append(
            MetricRow(
                iter=rec.iter,
                epoch=rec.epoch,
                dual_value=rec.dual_value,
                dual_residual=rec.dual_value - f_star,
                consensus_dist=rec.consensus_dist,
                primal_gap=agg.value_consensus(y_bar) - float(phi_star),
                message_count=rec.message_count,
            )
        )
    return rows


def agentwise_primal_gap(y_tilde: np.ndarray, agg: AggregateObjective, phi_star: float) -> float:
    """sum_i phi_i(y_i) - phi_star at the per-agent primal candidates."""
    return agg.value_cols(y_tilde) - float(phi_star)


def potential_trace(
    xref: XSpaceTrace, l_smooth: float, mu: float, f_star: float
) -> list[PotentialRow]:
    """Potential diagnostics along an accelerated matrix-space run.

    psi_k = (1+gamma)^k (f_k(y_k) - f_star + mu/2 ||z_k - x_star||^2)
    with gamma = 1/(sqrt(kappa)-1).  Between graph changes the potential
    cannot grow; at a change the admissible jump is controlled by the
    function-change bound, reported via ``change_bound_scaled``.
    """
    if xref.method != "nesterov":
        raise ValueError("potential diagnostics need an accelerated run")
    kappa = l_smooth / mu
    if kappa <= 1.0:
        raise ValueError("potential undefined for kappa <= 1")
    gamma = 1.0 / (math.sqrt(kappa) - 1.0)
    n_points = len(xref.ys)
    psi_scaled = np.empty(n_points)
    for k in range(n_points):
        value = xref.f_value(xref.epoch_of[k], xref.ys[k]) - f_star
        dist = fro_norm(xref.zs[k] - xref.x_star)
        psi_scaled[k] = value + 0.5 * mu * dist * dist

    rows = []
    for k in range(n_points):
        weight = (1.0 + gamma) ** k
        psi_k = weight * psi_scaled[k]
        if k + 1 < n_points:
            delta_scaled = (1.0 + gamma) * psi_scaled[k + 1] - psi_scaled[k]
            delta = weight * delta_scaled
            at_change = xref.epoch_of[k + 1] != xref.epoch_of[k]
            change_bound = None
            if at_change:
                f_old_at_new = xref.f_value(xref.epoch_of[k], xref.ys[k + 1])
                change_bound = (
                    (1.0 + gamma) * (l_smooth - mu) / mu * (f_old_at_new - f_star)
                )
        else:
            delta_scaled = math.nan
            delta = math.nan
            at_change = False
            change_bound = None
        rows.append(
            PotentialRow(
                iter=k,
                psi=psi_k,
                delta_psi=delta,
                at_change=at_change,
                psi_scaled=float(psi_scaled[k]),
                delta_psi_scaled=float(delta_scaled),
                change_bound_scaled=change_bound,
            )
        )
    return rows


def bound_check(rows: list[MetricRow], bound) -> BoundCheckReport:
    """Compare measured dual residuals against a per-iteration bound.

    ``bound`` maps an iteration index to the admissible residual.  Rows
    whose residual is NaN are skipped (primal-only traces).
    """
    max_violation = -math.inf
    first = None
    checked = 0
    for row in rows:
        if isinstance(row.dual_residual, float) and math.isnan(row.dual_residual):
            continue
        checked += 1
        violation = row.dual_residual - bound(row.iter)
        if violation > max_violation:
            max_violation = violation
        if violation > 0 and first is None:
            first = row.iter
    if checked == 0:
        return BoundCheckReport(clean=True, max_violation=-math.inf, first_violation_iter=None, checked=0)
    return BoundCheckReport(
        clean=first is None,
        max_violation=max_violation,
        first_violation_iter=first,
        checked=checked,
    )


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def emit(rows: list[MetricRow], fmt: str, path) -> None:
    """Write metric rows to ``path`` as CSV or JSON.

    CSV uses the fixed header and 17-significant-digit decimals, so the
    write/parse roundtrip is lossless and identical rows give identical
    bytes.
    """
    if fmt == "csv":
        lines = [CSV_HEADER]
        for r in rows:
            lines.append(
                ",".join(
                    (
                        str(r.iter),
                        str(r.epoch),
                        _fmt(r.dual_value),
                        _fmt(r.dual_residual),
                        _fmt(r.consensus_dist),
                        _fmt(r.primal_gap),
                        str(r.message_count),
                    )
                )
            )
        payload = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = json.dumps([asdict(r) for r in rows], indent=2, sort_keys=True) + "\n"
    else:
        raise ValueError("format must be 'csv' or 'json'")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def parse_csv(path) -> list[MetricRow]:
    """Read back a CSV produced by :func:`emit`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unrecognized CSV header")
    rows = []
    for ln in lines[1:]:
        it, ep, dv, dr, cd, pg, mc = ln.split(",")
        rows.append(
            MetricRow(
                iter=int(it),
                epoch=int(ep),
                dual_value=float(dv),
                dual_residual=float(dr),
                consensus_dist=float(cd),
                primal_gap=float(pg),
                message_count=int(mc),
            )
        )
    return rows
