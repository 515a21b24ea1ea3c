"""Network data model, forward pass, and the published PGA/PGV parameter sets.

The prediction equations implemented here are small feedforward networks with
one log-sigmoid hidden layer and a linear output neuron.  Inputs are moment
magnitude Mw, site shear-wave velocity Vs30 (m/s), and Joyner-Boore distance
RJB (km), each divided by a fixed normalization constant.  The network output
is ln(intensity measure) divided by a fixed output constant; PGA is in cm/s^2
and PGV in cm/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InputDomainError

# Standard gravity, used by the CLI to display PGA in g.
STANDARD_GRAVITY_CMPS2 = 980.665

# Data ranges covered by the underlying ground-motion catalog.  Predictions
# outside these ranges are extrapolations and get flagged, not rejected.
MAGNITUDE_RANGE = (3.0, 5.8)
RJB_RANGE_KM = (4.0, 500.0)


class Target(str, Enum):
    """Intensity measure a model predicts."""

    PGA = "PGA"
    PGV = "PGV"

    @property
    def units(self) -> str:
        return "cm/s^2" if self is Target.PGA else "cm/s"

    @property
    def column(self) -> str:
        """Catalog column carrying the observed value."""
        return "pga_cmps2" if self is Target.PGA else "pgv_cmps"


@dataclass(frozen=True)
class Normalization:
    """Fixed divisors applied to the raw inputs and to ln(intensity measure)."""

    mag_div: float
    vs30_div: float
    rjb_div: float
    log_out_div: float

    def __post_init__(self):
        for name in ("mag_div", "vs30_div", "rjb_div", "log_out_div"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"normalization divisor {name} must be finite and > 0, got {v!r}")


@dataclass(frozen=True)
class NetworkModel:
    """A trained 3-H-1 network plus its normalization.

    `input_hidden_weights` is an H x 3 matrix; row i holds the weights from
    (Mw, Vs30, RJB) into hidden neuron i.  Immutable after construction; all
    operations on it are pure.
    """

    hidden_count: int
    input_hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    hidden_output_weights: np.ndarray
    output_bias: float
    normalization: Normalization
    target: Target

    def __post_init__(self):
        h = self.hidden_count
        if not (isinstance(h, int) and 1 <= h <= 10):
            raise ValueError(f"hidden_count must be an integer in [1, 10], got {h!r}")
        w = np.asarray(self.input_hidden_weights, dtype=float)
        b = np.asarray(self.hidden_biases, dtype=float)
        v = np.asarray(self.hidden_output_weights, dtype=float)
        if w.shape != (h, 3):
            raise ValueError(f"input_hidden_weights must have shape ({h}, 3), got {w.shape}")
        if b.shape != (h,):
            raise ValueError(f"hidden_biases must have shape ({h},), got {b.shape}")
        if v.shape != (h,):
            raise ValueError(f"hidden_output_weights must have shape ({h},), got {v.shape}")
        if not (np.isfinite(w).all() and np.isfinite(b).all() and np.isfinite(v).all()
                and math.isfinite(self.output_bias)):
            raise ValueError("all weights and biases must be finite")
        for arr, name in ((w, "input_hidden_weights"), (b, "hidden_biases"),
                          (v, "hidden_output_weights")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "output_bias", float(self.output_bias))
        if not isinstance(self.target, Target):
            object.__setattr__(self, "target", Target(self.target))

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkModel):
            return NotImplemented
        return (
            self.hidden_count == other.hidden_count
            and np.array_equal(self.input_hidden_weights, other.input_hidden_weights)
            and np.array_equal(self.hidden_biases, other.hidden_biases)
            and np.array_equal(self.hidden_output_weights, other.hidden_output_weights)
            and self.output_bias == other.output_bias
            and self.normalization == other.normalization
            and self.target is other.target
        )


@dataclass(frozen=True)
class Prediction:
    """One forward-pass result in natural units plus its log-space forms."""

    value: float
    log_value: float
    normalized_log: float
    hidden_activations: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class GroundMotionRecord:
    """One catalog row: a recorded ground motion with source and site metadata.

    `pga` is in cm/s^2 and `pgv` in cm/s.  `baseline_pga` / `baseline_pgv`
    carry externally computed reference-model predictions when present.
    """

    event_id: str
    station_id: str
    magnitude: float
    vs30: float
    rjb: float
    pga: float
    pgv: float
    baseline_pga: float | None = None
    baseline_pgv: float | None = None


def validate_record(record: GroundMotionRecord) -> None:
    """Raise InputDomainError naming the first field that breaks an invariant."""
    if not math.isfinite(record.magnitude):
        raise InputDomainError(f"record {record.event_id}/{record.station_id}: magnitude must be finite")
    for name in ("vs30", "rjb", "pga", "pgv"):
        v = getattr(record, name)
        if not (math.isfinite(v) and v > 0):
            raise InputDomainError(
                f"record {record.event_id}/{record.station_id}: {name} must be finite and > 0, got {v!r}")


def out_of_domain_reasons(magnitude: float, rjb: float) -> list[str]:
    """Describe how (magnitude, rjb) fall outside the catalog data ranges.

    Empty list means the point is inside the ranges the models were built
    from; anything else is an extrapolation warning, not an error.
    """
    reasons = []
    lo, hi = MAGNITUDE_RANGE
    if not (lo <= magnitude <= hi):
        reasons.append(f"magnitude {magnitude:g} outside [{lo:g}, {hi:g}]")
    lo, hi = RJB_RANGE_KM
    if not (lo <= rjb <= hi):
        reasons.append(f"rjb {rjb:g} km outside [{lo:g}, {hi:g}] km")
    return reasons


def log_sigmoid(x):
    """Logistic activation 1/(1+exp(-x)), stable for any finite input.

    Accepts a scalar or ndarray; large |x| saturates to 0 or 1 without
    overflow.
    """
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if isinstance(x, np.ndarray) else float(out)


def _check_scalar(name: str, value: float, positive: bool) -> None:
    if not math.isfinite(value):
        raise InputDomainError(f"{name} must be finite, got {value!r}")
    if positive and value <= 0:
        raise InputDomainError(f"{name} must be > 0, got {value!r}")


def normalized_inputs(norm: Normalization, magnitude, vs30, rjb):
    """Divide the raw inputs by their normalization constants."""
    return (np.asarray(magnitude, dtype=float) / norm.mag_div,
            np.asarray(vs30, dtype=float) / norm.vs30_div,
            np.asarray(rjb, dtype=float) / norm.rjb_div)


def forward(model: NetworkModel, magnitude: float, vs30: float, rjb: float) -> Prediction:
    """Evaluate the network at one (Mw, Vs30, RJB) point.

    Returns the intensity measure in natural units (cm/s^2 for PGA, cm/s for
    PGV) together with its log and normalized-log forms and the hidden-layer
    activations.  Deterministic: identical inputs give bit-identical outputs.
    """
    _check_scalar("magnitude", magnitude, positive=False)
    _check_scalar("vs30", vs30, positive=True)
    _check_scalar("rjb", rjb, positive=True)
    norm = model.normalization
    xn = np.array([magnitude / norm.mag_div, vs30 / norm.vs30_div, rjb / norm.rjb_div])
    pre = model.input_hidden_weights @ xn + model.hidden_biases
    y = log_sigmoid(pre)
    normalized_log = model.output_bias + float(model.hidden_output_weights @ y)
    log_value = normalized_log * norm.log_out_div
    y.setflags(write=False)
    return Prediction(value=math.exp(log_value), log_value=log_value,
                      normalized_log=normalized_log, hidden_activations=y)


def batch_normalized_log(model: NetworkModel, magnitude, vs30, rjb) -> np.ndarray:
    """Vectorized normalized-log prediction over parallel input arrays."""
    mn, vn, rn = normalized_inputs(model.normalization, magnitude, vs30, rjb)
    for name, arr in (("magnitude", mn), ("vs30", vn), ("rjb", rn)):
        if not np.isfinite(arr).all():
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise InputDomainError(f"{name} is non-finite at index {bad}")
    xn = np.column_stack([mn, vn, rn])
    pre = xn @ model.input_hidden_weights.T + model.hidden_biases
    y = log_sigmoid(pre)
    return model.output_bias + y @ model.hidden_output_weights


def batch_values(model: NetworkModel, magnitude, vs30, rjb) -> np.ndarray:
    """Vectorized prediction in natural units (cm/s^2 or cm/s)."""
    return np.exp(batch_normalized_log(model, magnitude, vs30, rjb)
                  * model.normalization.log_out_div)


# Published parameter sets.  Per hidden neuron: (w_mag, w_vs30, w_rjb, bias,
# output weight); the trailing scalar is the output-neuron bias.
_PGA_ROWS = (
    (-93.7502, -0.1658, -4.7160, 68.6111, -0.1037),
    (4.9023, -0.6769, -2.7333, -2.6134, 1.1886),
    (-1.3182, 0.9545, -43.7438, -1.4151, 6.5491),
    (21.7529, 2.5431, -6.6562, -9.8652, 0.1886),
)
_PGA_OUTPUT_BIAS = -0.6149

_PGV_ROWS = (
    (1.7409, -0.4457, 45.7174, 1.1633, -15.1236),
    (-2.0083, 0.0730, 0.2576, 0.3429, -12.4700),
    (-0.9230, 0.6639, 10.4003, -1.7592, -2.6548),
    (-2.3723, -0.5214, 18.8468, -2.6345, 1.6283),
)
_PGV_OUTPUT_BIAS = 18.0142

PUBLISHED_INPUT_DIVISORS = (6.0, 1792.0, 522.0)
PUBLISHED_LOG_DIVISORS = {Target.PGA: 6.1, Target.PGV: 2.5}


def published_normalization(target: Target) -> Normalization:
    """Normalization constants used by the published models."""
    mag, vs30, rjb = PUBLISHED_INPUT_DIVISORS
    return Normalization(mag_div=mag, vs30_div=vs30, rjb_div=rjb,
                         log_out_div=PUBLISHED_LOG_DIVISORS[Target(target)])


def published_model(target: Target | str) -> NetworkModel:
    """Return the published four-neuron model for PGA or PGV."""
    target = Target(target)
    rows = _PGA_ROWS if target is Target.PGA else _PGV_ROWS
    out_bias = _PGA_OUTPUT_BIAS if target is Target.PGA else _PGV_OUTPUT_BIAS
    w = np.array([r[:3] for r in rows])
    b = np.array([r[3] for r in rows])
    v = np.array([r[4] for r in rows])
    return NetworkModel(hidden_count=len(rows), input_hidden_weights=w,
                        hidden_biases=b, hidden_output_weights=v,
                        output_bias=out_bias,
                        normalization=published_normalization(target),
                        target=target)
