"""Inflated-beta mixture model for transformed B-allele frequencies.

A transformed BAF value ``y = 2 * |x - 0.5|`` folds the two homozygous
bands onto 1 and the heterozygous band onto 0.  The lower band is modelled
by a zero-inflated ``Beta(1, shape_b)`` and the upper band by a one-inflated
``Beta(shape_a, 1)``.  Densities are taken with respect to Lebesgue measure
on (0, 1) plus unit atoms at 0 and 1; an atom belongs exclusively to the
component that owns it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]

SNAP_EPS = 1e-9
PROB_EPS = 1e-6

_TINY = float(np.finfo(np.float64).tiny)
_ONE_MINUS = float(np.nextafter(1.0, 0.0))


class ModelError(ValueError):
    """Raised for invalid model parameters or out-of-domain observations."""


def _check_prob(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ModelError(f"{name} must lie in [0, 1], got {value!r}")


def _check_shape(name: str, value: float) -> None:
    if not (value > 0.0 and math.isfinite(value)):
        raise ModelError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class ZeroInflatedBeta:
    """Lower-band component: atom at 0 plus ``(1 - theta0) * Beta(1, shape_b)``."""

    theta0: float
    shape_b: float

    def __post_init__(self) -> None:
        _check_prob("theta0", self.theta0)
        _check_shape("shape_b", self.shape_b)


@dataclass(frozen=True)
class OneInflatedBeta:
    """Upper-band component: atom at 1 plus ``(1 - theta1) * Beta(shape_a, 1)``."""

    theta1: float
    shape_a: float

    def __post_init__(self) -> None:
        _check_prob("theta1", self.theta1)
        _check_shape("shape_a", self.shape_a)


@dataclass(frozen=True)
class MixtureModel:
    """Two-component inflated-beta mixture.

    ``het_weight`` is the weight of the lower-band (zero-inflated) component,
    i.e. the heterozygous fraction of loci.
    """

    het_weight: float
    lower: ZeroInflatedBeta
    upper: OneInflatedBeta

    def __post_init__(self) -> None:
        _check_prob("het_weight", self.het_weight)

    @classmethod
    def from_params(
        cls,
        het_weight: float,
        theta0: float,
        shape_b: float,
        theta1: float,
        shape_a: float,
    ) -> "MixtureModel":
        return cls(
            het_weight=float(het_weight),
            lower=ZeroInflatedBeta(float(theta0), float(shape_b)),
            upper=OneInflatedBeta(float(theta1), float(shape_a)),
        )

    def params(self) -> dict[str, float]:
        """Flat parameter dictionary, handy for comparisons and reports."""
        return {
            "het_weight": self.het_weight,
            "theta0": self.lower.theta0,
            "shape_b": self.lower.shape_b,
            "theta1": self.upper.theta1,
            "shape_a": self.upper.shape_a,
        }

    def floored(self, eps: float = PROB_EPS) -> "MixtureModel":
        """Clip every probability parameter into ``[eps, 1 - eps]``.

        Used before likelihood-ratio work so that no observation has zero
        mass under either model.
        """

        def clip(p: float) -> float:
            return min(max(p, eps), 1.0 - eps)

        return MixtureModel(
            het_weight=clip(self.het_weight),
            lower=replace(self.lower, theta0=clip(self.lower.theta0)),
            upper=replace(self.upper, theta1=clip(self.upper.theta1)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "hetWeight": self.het_weight,
            "lower": {"theta0": self.lower.theta0, "shapeB": self.lower.shape_b},
            "upper": {"theta1": self.upper.theta1, "shapeA": self.upper.shape_a},
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "MixtureModel":
        try:
            return cls.from_params(
                doc["hetWeight"],
                doc["lower"]["theta0"],
                doc["lower"]["shapeB"],
                doc["upper"]["theta1"],
                doc["upper"]["shapeA"],
            )
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed model document: missing {exc}") from exc

    def to_json(self) -> str:
        # repr() of a float is the shortest string that round-trips exactly
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MixtureModel":
        return cls.from_dict(json.loads(text))


def tbaf_transform(baf: npt.ArrayLike, snap_eps: float = SNAP_EPS) -> FloatArray:
    """Fold BAF values onto [0, 1] via ``y = 2 * |x - 0.5|``.

    Inputs within ``snap_eps`` of 0 or 1 are snapped onto the boundary, and
    outputs within ``snap_eps`` of an atom are snapped onto it.

    Raises
    ------
    ModelError
        If any value is non-finite or lies outside ``[-snap_eps, 1 + snap_eps]``.
    """
    x = np.asarray(baf, dtype=np.float64).reshape(-1)
    bad = ~np.isfinite(x) | (x < -snap_eps) | (x > 1.0 + snap_eps)
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise ModelError(f"BAF value at index {idx} is outside [0, 1]: {x[idx]!r}")
    x = np.clip(x, 0.0, 1.0)
    y = 2.0 * np.abs(x - 0.5)
    return snap_atoms(y, snap_eps)


def snap_atoms(y: npt.ArrayLike, snap_eps: float = SNAP_EPS) -> FloatArray:
    """Snap values within ``snap_eps`` of 0 or 1 onto the atoms."""
    y = np.array(y, dtype=np.float64).reshape(-1)
    y[np.abs(y) <= snap_eps] = 0.0
    y[np.abs(1.0 - y) <= snap_eps] = 1.0
    return y


def _log(p: float) -> float:
    return math.log(p) if p > 0.0 else -math.inf


def component_log_densities(
    model: MixtureModel, y: npt.ArrayLike
) -> tuple[FloatArray, FloatArray]:
    """Weighted log-densities of the lower and upper components at ``y``.

    Returns ``(log(h * f_lower(y)), log((1 - h) * f_upper(y)))``.  No domain
    checking is done here; see :func:`log_density`.
    """
    y = np.asarray(y, dtype=np.float64)
    h = model.het_weight
    t0, b = model.lower.theta0, model.lower.shape_b
    t1, a = model.upper.theta1, model.upper.shape_a

    at0 = y == 0.0
    at1 = y == 1.0
    inner = ~(at0 | at1)
    yc = np.where(inner, y, 0.5)

    lo_const = _log(h) + _log(1.0 - t0) + math.log(b)
    up_const = _log(1.0 - h) + _log(1.0 - t1) + math.log(a)
    log_lo_cont = lo_const + (b - 1.0) * np.log1p(-yc)
    log_up_cont = up_const + (a - 1.0) * np.log(yc)

    log_lo_atom = _log(h) + _log(t0)
    log_up_atom = _log(1.0 - h) + _log(t1)

    lo = np.where(inner, log_lo_cont, np.where(at0, log_lo_atom, -np.inf))
    up = np.where(inner, log_up_cont, np.where(at1, log_up_atom, -np.inf))
    return lo, up


def log_density(model: MixtureModel, y: npt.ArrayLike) -> FloatArray | float:
    """Log mixture density at ``y`` under the mixed dominating measure.

    Accepts a scalar or an array; returns the same shape.  ``-inf`` is
    returned only where the mass or density is exactly zero.
    """
    arr = np.asarray(y, dtype=np.float64)
    if np.any(~np.isfinite(arr)) or np.any((arr < 0.0) | (arr > 1.0)):
        raise ModelError("log_density is defined only for y in [0, 1]")
    lo, up = component_log_densities(model, arr)
    out = np.logaddexp(lo, up)
    if arr.ndim == 0:
        return float(out)
    return out


def sample(model: MixtureModel, n: int, rng: np.random.Generator) -> FloatArray:
    """Draw ``n`` i.i.d. transformed-BAF values from ``model``.

    Always consumes exactly ``3 * n`` uniforms from ``rng``, so successive
    calls with the same generator yield prefix-consistent streams.
    """
    if n < 0:
        raise ModelError(f"n must be non-negative, got {n}")
    u_comp = rng.random(n)
    u_atom = rng.random(n)
    u_cont = rng.random(n)

    lower = u_comp < model.het_weight

    # Beta(1, b) by inversion: 1 - U^(1/b); Beta(a, 1): U^(1/a).
    # Continuous draws must never round onto an atom.
    lo_cont = np.clip(1.0 - u_cont ** (1.0 / model.lower.shape_b), _TINY, _ONE_MINUS)
    up_cont = np.clip(u_cont ** (1.0 / model.upper.shape_a), _TINY, _ONE_MINUS)
    lo_vals = np.where(u_atom < model.lower.theta0, 0.0, lo_cont)
    up_vals = np.where(u_atom < model.upper.theta1, 1.0, up_cont)
    return np.where(lower, lo_vals, up_vals)


def derive_loh_model(base: MixtureModel, delta: float) -> MixtureModel:
    """LOH-region model: same components, lower-band weight scaled by ``delta``."""
    if not (0.0 <= delta < 1.0):
        raise ModelError(f"delta must lie in [0, 1), got {delta!r}")
    return replace(base, het_weight=delta * base.het_weight)
