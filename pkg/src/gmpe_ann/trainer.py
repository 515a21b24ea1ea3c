"""Levenberg-Marquardt training with validation-based early stopping.

Targets are normalized log intensities ln(IM)/log_out_div, the same quantity
the closed-form prediction equations produce before rescaling.  The loss is
the plain sum of squared errors over the training subset; overfitting control
comes solely from early stopping against the validation subset.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (NetworkModel, Normalization, Target, log_sigmoid,
                   published_normalization, validate_record)
from .errors import AnalysisError, TrainingError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitSpec:
    """Random train/validation/test partition proportions plus the shuffle seed."""

    train_fraction: float = 0.60
    validation_fraction: float = 0.20
    test_fraction: float = 0.20
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_fraction, self.validation_fraction, self.test_fraction)
        if not all(0 < f < 1 for f in fracs):
            raise ValueError(f"split fractions must lie in (0, 1), got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fracs)!r}")


@dataclass(frozen=True)
class TrainConfig:
    """Levenberg-Marquardt and early-stopping hyperparameters."""

    hidden_count: int = 4
    max_iterations: int = 1000
    lm_lambda_init: float = 1e-3
    lm_lambda_up: float = 10.0
    lm_lambda_down: float = 0.1
    lm_lambda_max: float = 1e12
    gradient_tol: float = 1e-10
    loss_tol: float = 1e-12
    patience: int = 6
    init_seed: int = 0
    init_scale: float = 0.5

    def __post_init__(self):
        if self.hidden_count < 1:
            raise ValueError("hidden_count must be >= 1")
        if self.lm_lambda_up <= 1:
            raise ValueError("lm_lambda_up must be > 1")
        if not (0 < self.lm_lambda_down < 1):
            raise ValueError("lm_lambda_down must lie in (0, 1)")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass(frozen=True)
class TrainingReport:
    """Everything a training run produced, immutable once returned.

    `model` holds the returned weights (the best-validation iterate when
    stop_reason is "early_stopped", the final iterate otherwise);
    `last_iterate_model` always holds the final iterate for diagnostics.
    History arrays have one entry per accepted iteration, starting with the
    initial state at index 0.
    """

    train_indices: np.ndarray
    validation_indices: np.ndarray
    test_indices: np.ndarray
    train_losses: np.ndarray
    validation_losses: np.ndarray
    lambdas: np.ndarray
    stop_reason: str
    n_iterations: int
    best_validation_iteration: int
    r_train: float
    r_validation: float
    r_test: float
    model: NetworkModel
    last_iterate_model: NetworkModel


STOP_CONVERGED = "converged"
STOP_EARLY = "early_stopped"
STOP_MAX_ITERATIONS = "max_iterations"


def split_catalog(records, spec: SplitSpec):
    """Randomly partition record indices into train/validation/test sets.

    Validation and test sizes are round(n * fraction); the remainder goes to
    train.  Deterministic given the seed; returns three sorted, disjoint
    index arrays covering all records.
    """
    n = len(records)
    if n < 10:
        raise ValueError(f"need at least 10 records to split, got {n}")
    n_val = round(n * spec.validation_fraction)
    n_test = round(n * spec.test_fraction)
    n_train = n - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise ValueError(f"split of {n} records leaves an empty subset")
    perm = np.random.default_rng(spec.seed).permutation(n)
    train = np.sort(perm[:n_train])
    val = np.sort(perm[n_train:n_train + n_val])
    test = np.sort(perm[n_train + n_val:])
    return train, val, test


def correlation(predicted, observed) -> float:
    """Pearson correlation coefficient, clipped to [-1, 1]."""
    x = np.asarray(predicted, dtype=float)
    y = np.asarray(observed, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"inputs must be equal-length vectors, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ValueError("correlation needs at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise AnalysisError("correlation undefined: an input has zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


# Parameter vector layout: H*3 input weights (hidden-major), H hidden biases,
# H output weights, 1 output bias.


def _pack(w: np.ndarray, b: np.ndarray, v: np.ndarray, b_out: float) -> np.ndarray:
    return np.concatenate([w.ravel(), b, v, [b_out]])


def _unpack(theta: np.ndarray, h: int):
    w = theta[:3 * h].reshape(h, 3)
    b = theta[3 * h:4 * h]
    v = theta[4 * h:5 * h]
    return w, b, v, float(theta[5 * h])


def _predict_normalized(theta: np.ndarray, h: int, xn: np.ndarray) -> np.ndarray:
    w, b, v, b_out = _unpack(theta, h)
    y = log_sigmoid(xn @ w.T + b)
    return b_out + y @ v


def _jacobian_arrays(theta: np.ndarray, h: int, xn: np.ndarray) -> np.ndarray:
    """Analytic d(prediction)/d(parameter), one row per record."""
    w, b, v, _ = _unpack(theta, h)
    y = log_sigmoid(xn @ w.T + b)
    s = y * (1.0 - y) * v  # d(prediction)/d(preactivation_i), shape (n, h)
    n = xn.shape[0]
    jac = np.empty((n, 5 * h + 1))
    jac[:, :3 * h] = (s[:, :, None] * xn[:, None, :]).reshape(n, 3 * h)
    jac[:, 3 * h:4 * h] = s
    jac[:, 4 * h:5 * h] = y
    jac[:, 5 * h] = 1.0
    return jac


def _normalized_input_matrix(model_or_norm, records) -> np.ndarray:
    norm = (model_or_norm.normalization
            if isinstance(model_or_norm, NetworkModel) else model_or_norm)
    mw = np.array([r.magnitude for r in records]) / norm.mag_div
    vs = np.array([r.vs30 for r in records]) / norm.vs30_div
    rj = np.array([r.rjb for r in records]) / norm.rjb_div
    return np.column_stack([mw, vs, rj])


def jacobian(model: NetworkModel, records) -> np.ndarray:
    """Derivatives of the normalized-log prediction w.r.t. every parameter.

    Column order: the H x 3 input weights (hidden-major), the H hidden
    biases, the H output weights, then the output bias.
    """
    theta = _pack(model.input_hidden_weights, model.hidden_biases,
                  model.hidden_output_weights, model.output_bias)
    return _jacobian_arrays(theta, model.hidden_count, _normalized_input_matrix(model, records))


def fit_normalization(records, target: Target | str) -> Normalization:
    """Divisors from training-data maxima, rounded up to two significant digits."""

    def round_up(x: float) -> float:
        if x <= 0:
            raise ValueError("cannot fit a divisor to non-positive data")
        exp = math.floor(math.log10(x)) - 1
        # Epsilon guards decimal values that land a hair above an integer
        # quotient; the integer product/division keeps the result exact.
        n = math.ceil(x / 10.0 ** exp - 1e-9)
        return float(n * 10 ** exp) if exp >= 0 else n / 10 ** -exp

    target = Target(target)
    values = [r.pga if target is Target.PGA else r.pgv for r in records]
    return Normalization(
        mag_div=round_up(max(r.magnitude for r in records)),
        vs30_div=round_up(max(r.vs30 for r in records)),
        rjb_div=round_up(max(r.rjb for r in records)),
        log_out_div=round_up(max(abs(math.log(v)) for v in values)),
    )


def _targets(records, target: Target, log_out_div: float) -> np.ndarray:
    obs = np.array([r.pga if target is Target.PGA else r.pgv for r in records])
    return np.log(obs) / log_out_div


def train(records, target: Target | str, config: TrainConfig,
          split: SplitSpec | None = None,
          normalization: Normalization | None = None) -> TrainingReport:
    """Fit a network to the catalog with Levenberg-Marquardt.

    Minimizes the training-subset sum of squared errors on normalized log
    targets.  A candidate step is accepted only if it does not increase the
    training loss, so accepted-iteration losses are non-increasing.  After
    each accepted step the validation loss is checked; `config.patience`
    consecutive non-improving checks stop training and roll back to the
    best-validation weights.  Fully deterministic given seeds.
    """
    target = Target(target)
    split = split or SplitSpec()
    for rec in records:
        validate_record(rec)
    train_idx, val_idx, test_idx = split_catalog(records, split)
    norm = normalization or published_normalization(target)

    xn_all = _normalized_input_matrix(norm, records)
    t_all = _targets(records, target, norm.log_out_div)
    xn_train, t_train = xn_all[train_idx], t_all[train_idx]
    xn_val, t_val = xn_all[val_idx], t_all[val_idx]

    h = config.hidden_count
    n_params = 5 * h + 1
    rng = np.random.default_rng(config.init_seed)
    theta = rng.uniform(-config.init_scale, config.init_scale, size=n_params)

    def train_loss(th):
        e = _predict_normalized(th, h, xn_train) - t_train
        return float(e @ e), e

    def val_loss(th):
        e = _predict_normalized(th, h, xn_val) - t_val
        return float(e @ e)

    def check_finite(loss_value, residuals, subset_idx, iteration):
        if math.isfinite(loss_value):
            return
        bad = int(np.flatnonzero(~np.isfinite(residuals))[0])
        rec = records[subset_idx[bad]]
        raise TrainingError(
            f"non-finite loss at iteration {iteration} from record "
            f"{rec.event_id}/{rec.station_id}")

    lam = config.lm_lambda_init
    loss, e = train_loss(theta)
    check_finite(loss, e, train_idx, 0)
    vloss = val_loss(theta)

    train_hist = [loss]
    val_hist = [vloss]
    lam_hist = [lam]

    best_val = vloss
    best_theta = theta.copy()
    best_iter = 0
    bad_checks = 0
    stop_reason = STOP_MAX_ITERATIONS
    iteration = 0
    eye = np.eye(n_params)

    for iteration in range(1, config.max_iterations + 1):
        jac = _jacobian_arrays(theta, h, xn_train)
        grad = jac.T @ e
        if float(np.abs(grad).max()) < config.gradient_tol:
            iteration -= 1
            stop_reason = STOP_CONVERGED
            break
        jtj = jac.T @ jac

        # Inner damping loop: raise lambda until a non-increasing step appears.
        accepted = False
        while True:
            try:
                step = np.linalg.solve(jtj + lam * eye, -grad)
                if not np.isfinite(step).all():
                    raise np.linalg.LinAlgError("non-finite step")
            except np.linalg.LinAlgError:
                if lam >= config.lm_lambda_max:
                    raise TrainingError(
                        f"singular normal equations at iteration {iteration} "
                        f"with maximum damping {lam:g}")
                lam *= config.lm_lambda_up
                continue
            cand = theta + step
            cand_loss, cand_e = train_loss(cand)
            check_finite(cand_loss, cand_e, train_idx, iteration)
            if cand_loss <= loss:
                accepted = True
                break
            if lam >= config.lm_lambda_max:
                break
            lam *= config.lm_lambda_up

        if not accepted:
            # No descent possible even at maximum damping: a stationary point.
            iteration -= 1
            stop_reason = STOP_CONVERGED
            break

        prev_loss = loss
        theta, loss, e = cand, cand_loss, cand_e
        lam = max(lam * config.lm_lambda_down, 1e-15)
        vloss = val_loss(theta)
        assert loss <= prev_loss, "accepted step increased the training loss"
        train_hist.append(loss)
        val_hist.append(vloss)
        lam_hist.append(lam)

        if vloss < best_val:
            best_val = vloss
            best_theta = theta.copy()
            best_iter = iteration
            bad_checks = 0
        else:
            bad_checks += 1
            if bad_checks >= config.patience:
                stop_reason = STOP_EARLY
                break

        if prev_loss - loss <= config.loss_tol:
            stop_reason = STOP_CONVERGED
            break
    else:
        iteration = config.max_iterations

    returned = best_theta if stop_reason == STOP_EARLY else theta

    def build(th) -> NetworkModel:
        w, b, v, b_out = _unpack(th, h)
        return NetworkModel(hidden_count=h, input_hidden_weights=w.copy(),
                            hidden_biases=b.copy(), hidden_output_weights=v.copy(),
                            output_bias=b_out, normalization=norm, target=target)

    model = build(returned)
    pred_all = _predict_normalized(returned, h, xn_all)
    r_values = []
    for idx in (train_idx, val_idx, test_idx):
        try:
            r_values.append(correlation(pred_all[idx], t_all[idx]))
        except AnalysisError:
            r_values.append(float("nan"))

    log.info("training stopped (%s) after %d iterations: loss %.3e, R_test %.4f",
             stop_reason, iteration, loss, r_values[2])
    return TrainingReport(
        train_indices=train_idx, validation_indices=val_idx, test_indices=test_idx,
        train_losses=np.array(train_hist), validation_losses=np.array(val_hist),
        lambdas=np.array(lam_hist), stop_reason=stop_reason, n_iterations=iteration,
        best_validation_iteration=best_iter,
        r_train=r_values[0], r_validation=r_values[1], r_test=r_values[2],
        model=model, last_iterate_model=build(theta))


@dataclass(frozen=True)
class SweepEntry:
    """Outcome of one hidden-size candidate in a sweep."""

    hidden_count: int
    r2_train: float = float("nan")
    r2_test: float = float("nan")
    stop_reason: str = ""
    error: str = ""
    report: TrainingReport | None = field(default=None, repr=False, compare=False)

    @property
    def failed(self) -> bool:
        return bool(self.error)


@dataclass(frozen=True)
class SweepResult:
    entries: tuple[SweepEntry, ...]
    selected: SweepEntry

    @property
    def selected_hidden_count(self) -> int:
        return self.selected.hidden_count


def sweep_hidden_sizes(records, target: Target | str, config_template: TrainConfig,
                       split: SplitSpec | None = None, h_range=range(1, 11),
                       margin: float = 0.01,
                       normalization: Normalization | None = None) -> SweepResult:
    """Train one model per hidden size and pick the smallest adequate one.

    The selected size is the smallest H whose test R-squared comes within
    `margin` of the best over the sweep.  Failures for individual sizes are
    recorded and skipped; only a fully failed sweep raises.
    """
    h_values = list(h_range)
    if not h_values:
        raise ValueError("h_range must be non-empty")
    entries = []
    for h in h_values:
        config = replace(config_template, hidden_count=h)
        try:
            report = train(records, target, config, split, normalization)
        except TrainingError as err:
            log.warning("hidden size %d failed: %s", h, err)
            entries.append(SweepEntry(hidden_count=h, error=str(err)))
            continue
        entries.append(SweepEntry(hidden_count=h, r2_train=report.r_train ** 2,
                                  r2_test=report.r_test ** 2,
                                  stop_reason=report.stop_reason, report=report))
    ok = [en for en in entries if not en.failed and math.isfinite(en.r2_test)]
    if not ok:
        raise TrainingError("hidden-size sweep failed for every candidate")
    best = max(en.r2_test for en in ok)
    selected = min((en for en in ok if en.r2_test >= best - margin),
                   key=lambda en: en.hidden_count)
    return SweepResult(entries=tuple(entries), selected=selected)
