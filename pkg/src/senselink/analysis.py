"""Closed-form error analysis for discriminant-gain designs.

A binary ML test between two Gaussian classes separated by discriminant
gain DG errs with probability Q(sqrt(DG / 2)); for L classes the worst-pair
gain DG_min gives the reference bound (L - 1) Q(sqrt(DG_min / 2)).  Over a
unit-mean exponential fading power the single-carrier optimum averages to

    E[DG*] = DG_max * (1 - (1/rho) e^{1/rho} E_1(1/rho)),

with rho the effective channel SNR and E_1 the exponential integral.  E_1
is evaluated locally: alternating power series below z = 1, modified-Lentz
continued fraction above, with the stabilized product e^z E_1(z) used so
small rho never exponentiates a large argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

__all__ = [
    "ErrorBound",
    "q_function",
    "exp_integral_e1",
    "binary_error_probability",
    "union_lower_bound",
    "multivariate_dg",
    "average_dg_closed_form",
]

_EULER_GAMMA = 0.5772156649015329
_SERIES_SWITCH = 1.0
_SMALL_RHO = 1e-2


def q_function(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x); array-aware."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc(x / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def _e1_series(z: float) -> float:
    # E_1(z) = -gamma - ln z + sum_{k>=1} (-1)^{k+1} z^k / (k k!)
    acc = -_EULER_GAMMA - math.log(z)
    term = 1.0
    for k in range(1, 200):
        term *= -z / k
        contrib = -term / k
        acc += contrib
        if abs(contrib) < 1e-17 * max(abs(acc), 1e-300):
            return acc
    raise ArithmeticError(f"E1 series failed to converge at z={z}")


def _e1_cf_scaled(z: float) -> float:
    """e^z E_1(z) via the modified Lentz continued fraction, z >= ~1.

    e^z E_1(z) = 1 / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...))).
    """
    tiny = 1e-300
    b = z + 1.0
    f = b if b != 0.0 else tiny
    C = f
    D = 0.0
    for k in range(1, 500):
        a = -float(k * k)
        b = z + 1.0 + 2.0 * k
        D = b + a * D
        if D == 0.0:
            D = tiny
        C = b + a / C
        if C == 0.0:
            C = tiny
        D = 1.0 / D
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return 1.0 / f
    raise ArithmeticError(f"E1 continued fraction failed to converge at z={z}")


def _e1_scaled(z: float) -> float:
    """e^z E_1(z), stable for any positive z."""
    if z < _SERIES_SWITCH:
        return math.exp(z) * _e1_series(z)
    return _e1_cf_scaled(z)


def exp_integral_e1(z):
    """Exponential integral E_1(z) = int_z^inf e^{-t}/t dt for z > 0.

    Scalars return floats; arrays map elementwise.  z <= 0 raises.
    """
    arr = np.asarray(z, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("exp_integral_e1 requires z > 0")
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    for i, v in enumerate(flat):
        zv = float(v)
        if zv < _SERIES_SWITCH:
            out[i] = _e1_series(zv)
        else:
            out[i] = math.exp(-zv) * _e1_cf_scaled(zv)
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def binary_error_probability(dg):
    """Exact binary ML error Q(sqrt(DG / 2)) at discriminant gain DG >= 0."""
    dg = np.asarray(dg, dtype=float)
    if np.any(dg < 0.0):
        raise ValueError("discriminant gain must be nonnegative")
    out = q_function(np.sqrt(dg / 2.0))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ErrorBound:
    """Worst-pair error reference (L - 1) Q(sqrt(DG_min / 2)).

    valid is False when the expression exceeds 1 and is uninformative as a
    probability; the raw value is still reported.
    """

    dg_min: float
    num_classes: int
    value: float
    valid: bool


def union_lower_bound(dg_min: float, num_classes: int) -> ErrorBound:
    """Multi-class error reference from the worst pair's discriminant gain."""
    if num_classes < 2:
        raise ValueError("need at least two classes")
    if dg_min < 0.0:
        raise ValueError("discriminant gain must be nonnegative")
    value = (num_classes - 1) * binary_error_probability(dg_min)
    return ErrorBound(
        dg_min=float(dg_min),
        num_classes=int(num_classes),
        value=float(value),
        valid=bool(value <= 1.0),
    )


def multivariate_dg(mean_gaps_sq, variances):
    """Total discriminant gain sum_m delta_m^2 / sigma_m^2 of independent dims."""
    gaps = np.asarray(mean_gaps_sq, dtype=float)
    var = np.asarray(variances, dtype=float)
    if gaps.shape != var.shape:
        raise ValueError("mean_gaps_sq and variances must have equal shape")
    if np.any(var <= 0.0):
        raise ValueError("variances must be strictly positive")
    if np.any(gaps < 0.0):
        raise ValueError("mean_gaps_sq must be nonnegative")
    return float(np.sum(gaps / var))


def _avg_dg_factor(rho: float) -> float:
    """1 - (1/rho) e^{1/rho} E_1(1/rho), numerically stable for all rho > 0."""
    if rho < _SMALL_RHO:
        # alternating asymptotic series sum_{k>=1} (-1)^{k+1} k! rho^k,
        # truncated at its smallest term
        acc = 0.0
        term = 1.0
        prev = math.inf
        for k in range(1, 200):
            term *= k * rho
            if term >= prev:
                break
            acc += term if k % 2 == 1 else -term
            prev = term
            if term < 1e-18 * max(acc, 1e-300):
                break
        return acc
    z = 1.0 / rho
    return 1.0 - z * _e1_scaled(z)


def average_dg_closed_form(dg_max, rho):
    """Mean optimal discriminant gain over unit-mean exponential fading power.

    dg_max is the no-fading ceiling delta^2 / sigma^2; rho is the effective
    SNR sigma^2 P_c / (sigma_w^2 nu^2).  Elementwise over array rho.
    """
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr <= 0.0):
        raise ValueError("rho must be positive")
    if np.any(np.asarray(dg_max, dtype=float) < 0.0):
        raise ValueError("dg_max must be nonnegative")
    flat = rho_arr.reshape(-1)
    fac = np.array([_avg_dg_factor(float(r)) for r in flat]).reshape(rho_arr.shape)
    out = np.asarray(dg_max, dtype=float) * fac
    return float(out) if out.ndim == 0 else out
