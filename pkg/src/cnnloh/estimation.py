"""EM fitting of the inflated-beta mixture on a LOH-free training segment."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .model import FloatArray, MixtureModel, ModelError, component_log_densities

_log = logging.getLogger(__name__)

MIN_TRAIN_LEN = 10
RECOMMENDED_TRAIN_LEN = 500

# observations in (0, 1) are kept this far from the atoms before taking logs
LOG_GUARD = 1e-12


class EstimationError(ValueError):
    """Raised when the training data cannot support a fit."""


@dataclass(frozen=True)
class EmConfig:
    max_iter: int = 500
    ll_tol: float = 1e-8
    init: MixtureModel | None = None

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.ll_tol > 0:
            raise ValueError("ll_tol must be > 0")


@dataclass
class EmReport:
    model: MixtureModel
    iterations: int
    log_lik_trace: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def final_log_lik(self) -> float:
        return self.log_lik_trace[-1]


def default_init(y: FloatArray) -> MixtureModel:
    """Crude band split at 0.5 used when no starting model is supplied."""
    low = y < 0.5
    n_low = int(low.sum())
    n_high = y.size - n_low
    theta0 = float((y[low] == 0.0).sum() / n_low) if n_low else 0.0
    theta1 = float((y[~low] == 1.0).sum() / n_high) if n_high else 0.0
    return MixtureModel.from_params(
        het_weight=n_low / y.size,
        theta0=theta0 if theta0 > 0 else 0.05,
        shape_b=2.0,
        theta1=theta1 if theta1 > 0 else 0.05,
        shape_a=2.0,
    )


def _upper_responsibility(model: MixtureModel, y: FloatArray) -> tuple[FloatArray, float]:
    """Posterior probability of the upper component, and the log-likelihood."""
    lo, up = component_log_densities(model, y)
    total = np.logaddexp(lo, up)
    with np.errstate(invalid="ignore"):
        gamma = np.exp(up - total)
    # atoms are owned outright; nan only arises where both masses vanish
    gamma[y == 1.0] = 1.0
    gamma[y == 0.0] = 0.0
    gamma = np.nan_to_num(gamma, nan=0.5)
    return gamma, float(total.sum())


def weighted_power_shape(weights: FloatArray, log_x: FloatArray) -> float | None:
    """Weighted MLE of ``k`` for the density ``k * x^(k - 1)`` on (0, 1).

    ``Beta(a, 1)`` uses ``log_x = log(y)``; ``Beta(1, b)`` uses
    ``log_x = log(1 - y)``.  Returns ``None`` when the weights carry no
    information.
    """
    num = float(weights.sum())
    den = float(-(weights * log_x).sum())
    if num > 0 and den > 0:
        return num / den
    return None


def _m_step(
    y: FloatArray,
    gamma: FloatArray,
    inner: npt.NDArray[np.bool_],
    log_y: FloatArray,
    log_1my: FloatArray,
    n_zero: int,
    n_one: int,
    prev: MixtureModel,
) -> MixtureModel:
    g_up = float(gamma.sum())
    g_lo = float(y.size - g_up)
    g_in = gamma[inner]

    het_weight = g_lo / y.size
    theta1 = n_one / g_up if g_up > 0 else prev.upper.theta1
    theta0 = n_zero / g_lo if g_lo > 0 else prev.lower.theta0

    # keep the old shape when a component has no continuous mass to learn from
    shape_a = weighted_power_shape(g_in, log_y) or prev.upper.shape_a
    shape_b = weighted_power_shape(1.0 - g_in, log_1my) or prev.lower.shape_b

    return MixtureModel.from_params(
        het_weight=min(max(het_weight, 0.0), 1.0),
        theta0=min(max(theta0, 0.0), 1.0),
        shape_b=shape_b,
        theta1=min(max(theta1, 0.0), 1.0),
        shape_a=shape_a,
    )


def fit_em(data: npt.ArrayLike, cfg: EmConfig | None = None) -> EmReport:
    """Fit a :class:`MixtureModel` to transformed BAF values by EM.

    Parameters
    ----------
    data : array_like
        Transformed BAF values in [0, 1] from a region believed free of LOH.
        At least ``MIN_TRAIN_LEN`` values are required; a few hundred or more
        are recommended.
    cfg : EmConfig, optional
        Iteration controls and optional starting model.

    Returns
    -------
    EmReport
        The fitted model (probability floors applied), iteration count,
        log-likelihood trace and convergence flag.
    """
    cfg = cfg or EmConfig()
    y = np.asarray(data, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(y)):
        raise ModelError("training data contains non-finite values")
    if np.any((y < 0.0) | (y > 1.0)):
        raise ModelError("training data must lie in [0, 1]")
    if y.size < MIN_TRAIN_LEN:
        raise EstimationError(
            f"need at least {MIN_TRAIN_LEN} observations to fit, got {y.size}"
        )
    if y.size < RECOMMENDED_TRAIN_LEN:
        _log.warning(
            "training segment has %d observations; >= %d recommended",
            y.size,
            RECOMMENDED_TRAIN_LEN,
        )
    for atom in (0.0, 1.0):
        if np.all(y == atom):
            raise EstimationError(f"degenerate fit: every observation is at the atom {atom:g}")

    # sorting makes every reduction order-independent, so permuted inputs
    # give bit-identical fits
    y = np.sort(y)
    inner = (y > 0.0) & (y < 1.0)
    y[inner] = np.clip(y[inner], LOG_GUARD, 1.0 - LOG_GUARD)
    log_y = np.log(y[inner])
    log_1my = np.log1p(-y[inner])
    n_zero = int((y == 0.0).sum())
    n_one = int((y == 1.0).sum())

    model = cfg.init if cfg.init is not None else default_init(y)
    gamma, ll = _upper_responsibility(model, y)
    trace = [ll]
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        model = _m_step(y, gamma, inner, log_y, log_1my, n_zero, n_one, model)
        gamma, ll = _upper_responsibility(model, y)
        prev = trace[-1]
        trace.append(ll)
        if np.isfinite(prev) and abs(ll - prev) <= cfg.ll_tol * abs(prev):
            converged = True
            break

    _log.debug("EM stopped after %d iterations, loglik %.6f", it, trace[-1])
    return EmReport(model=model.floored(), iterations=it, log_lik_trace=trace, converged=converged)
