"""Sensitivity, residual, and attenuation-curve analysis of trained models."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import NetworkModel, Target, batch_values
from .errors import AnalysisError

log = logging.getLogger(__name__)

# Two-sided 90% normal quantile for the confidence interval of a bin mean.
Z_90 = 1.645

DEFAULT_RJB_EDGES_KM = (4.0, 8.0, 16.0, 31.0, 63.0, 125.0, 250.0, 500.0)
DEFAULT_VS30_EDGES_MPS = (150.0, 300.0, 450.0, 600.0, 760.0, 1100.0, 1800.0)

INPUT_NAMES = ("mw", "vs30", "rjb")


@dataclass(frozen=True)
class ImportanceVector:
    """Relative contribution of each input to a model's output, summing to 1."""

    mw: float
    vs30: float
    rjb: float

    def as_dict(self) -> dict[str, float]:
        return {"mw": self.mw, "vs30": self.vs30, "rjb": self.rjb}

    def ranked(self) -> list[tuple[str, float]]:
        return sorted(self.as_dict().items(), key=lambda kv: kv[1], reverse=True)


def garson_importance(model: NetworkModel) -> ImportanceVector:
    """Connection-weight importance of (Mw, Vs30, RJB) for a trained model.

    Each hidden neuron's input weights are partitioned by absolute value,
    |w_ji| / sum_k |w_ki|, so every neuron distributes one unit of influence
    across the inputs regardless of the magnitude of its outgoing weight;
    the per-neuron shares are then summed over the hidden layer and
    renormalized to 1.
    """
    w = np.abs(model.input_hidden_weights)
    row_sums = w.sum(axis=1)
    zero_rows = np.flatnonzero(row_sums == 0.0)
    if zero_rows.size:
        raise AnalysisError(
            f"hidden neuron {int(zero_rows[0])} has all-zero input weights; "
            "importance partition is undefined")
    q = (w / row_sums[:, None]).sum(axis=0)
    imp = q / q.sum()
    return ImportanceVector(mw=float(imp[0]), vs30=float(imp[1]), rjb=float(imp[2]))


@dataclass(frozen=True)
class ResidualTable:
    """Per-record residuals ln(observed / predicted) against one predictor.

    Positive residuals mean the predictor underestimates.  Parallel arrays;
    `excluded_count` counts records dropped for missing baseline values.
    """

    target: Target
    predictor_name: str
    event_ids: tuple[str, ...]
    station_ids: tuple[str, ...]
    magnitude: np.ndarray
    vs30: np.ndarray
    rjb: np.ndarray
    observed: np.ndarray
    predicted: np.ndarray
    residuals: np.ndarray
    excluded_count: int

    def __len__(self) -> int:
        return self.residuals.size


def residuals(records, predictor, target: Target | str | None = None) -> ResidualTable:
    """Residuals of a model, or of catalog baseline columns, over a catalog.

    `predictor` is either a NetworkModel or the string "baseline"; in the
    baseline case `target` selects which baseline column to use and records
    with no baseline value are excluded (counted, not an error).
    """
    if isinstance(predictor, NetworkModel):
        target = predictor.target if target is None else Target(target)
        if target is not predictor.target:
            raise ValueError(f"model predicts {predictor.target.value}, not {target.value}")
        kept = list(records)
        excluded = 0
        predicted = batch_values(predictor,
                                 np.array([r.magnitude for r in kept]),
                                 np.array([r.vs30 for r in kept]),
                                 np.array([r.rjb for r in kept]))
        name = f"model:{target.value}"
    elif predictor == "baseline":
        if target is None:
            raise ValueError("target is required when using baseline columns")
        target = Target(target)
        attr = "baseline_pga" if target is Target.PGA else "baseline_pgv"
        kept = [r for r in records if getattr(r, attr) is not None]
        excluded = len(records) - len(kept)
        if excluded:
            log.info("excluded %d records with no %s value", excluded, attr)
        predicted = np.array([getattr(r, attr) for r in kept], dtype=float)
        name = f"baseline:{target.value}"
    else:
        raise ValueError(f"predictor must be a NetworkModel or 'baseline', got {predictor!r}")

    observed = np.array([r.pga if target is Target.PGA else r.pgv for r in kept])
    bad = np.flatnonzero(predicted <= 0)
    if bad.size:
        rec = kept[int(bad[0])]
        raise AnalysisError(
            f"non-positive predicted value for record {rec.event_id}/{rec.station_id}")
    res = np.log(observed) - np.log(predicted)
    return ResidualTable(
        target=target, predictor_name=name,
        event_ids=tuple(r.event_id for r in kept),
        station_ids=tuple(r.station_id for r in kept),
        magnitude=np.array([r.magnitude for r in kept]),
        vs30=np.array([r.vs30 for r in kept]),
        rjb=np.array([r.rjb for r in kept]),
        observed=observed, predicted=predicted, residuals=res,
        excluded_count=excluded)


@dataclass(frozen=True)
class ResidualBin:
    low: float
    high: float
    count: int
    mean: float | None
    ci_low: float | None
    ci_high: float | None


@dataclass(frozen=True)
class BinnedResiduals:
    """Mean residual and 90% confidence interval of the mean, per bin."""

    group_by: str
    edges: tuple[float, ...]
    bins: tuple[ResidualBin, ...]
    outside_count: int


def bin_residuals(table: ResidualTable, group_by: str, edges=None) -> BinnedResiduals:
    """Group residuals by rjb or vs30 and summarize each bin.

    Bins are [edge_k, edge_k+1), with the final bin closed on the right.
    The confidence interval is mean +- 1.645 * s / sqrt(n) and is reported
    only for bins with n >= 2; single-record bins have a mean but no CI.
    """
    if group_by not in ("rjb", "vs30"):
        raise ValueError(f"group_by must be 'rjb' or 'vs30', got {group_by!r}")
    if edges is None:
        edges = DEFAULT_RJB_EDGES_KM if group_by == "rjb" else DEFAULT_VS30_EDGES_MPS
    edges = tuple(float(e) for e in edges)
    if len(edges) < 2 or any(a >= b for a, b in zip(edges, edges[1:])):
        raise ValueError("edges must be strictly increasing with at least 2 values")

    values = table.rjb if group_by == "rjb" else table.vs30
    res = table.residuals
    bins = []
    assigned = 0
    for k in range(len(edges) - 1):
        last = k == len(edges) - 2
        mask = (values >= edges[k]) & ((values <= edges[k + 1]) if last else (values < edges[k + 1]))
        sel = res[mask]
        n = int(sel.size)
        assigned += n
        if n == 0:
            bins.append(ResidualBin(edges[k], edges[k + 1], 0, None, None, None))
            continue
        mean = float(sel.mean())
        if n >= 2:
            half = Z_90 * float(sel.std(ddof=1)) / math.sqrt(n)
            bins.append(ResidualBin(edges[k], edges[k + 1], n, mean, mean - half, mean + half))
        else:
            bins.append(ResidualBin(edges[k], edges[k + 1], n, mean, None, None))
    if assigned == 0:
        log.warning("no residuals fall inside the %s bin edges", group_by)
    return BinnedResiduals(group_by=group_by, edges=edges, bins=tuple(bins),
                           outside_count=len(table) - assigned)


@dataclass(frozen=True)
class AttenuationCurve:
    """Predicted intensity versus distance at fixed magnitude and site."""

    target: Target
    magnitude: float
    vs30: float
    rjb: np.ndarray
    values: np.ndarray


def attenuation_curve(model: NetworkModel, magnitude: float, vs30: float,
                      rjb_grid) -> AttenuationCurve:
    """Evaluate the model along a strictly increasing distance grid."""
    grid = np.asarray(rjb_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError("rjb_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("rjb_grid must be strictly increasing")
    values = batch_values(model, np.full(grid.shape, float(magnitude)),
                          np.full(grid.shape, float(vs30)), grid)
    return AttenuationCurve(target=model.target, magnitude=float(magnitude),
                            vs30=float(vs30), rjb=grid, values=values)
