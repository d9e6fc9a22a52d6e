"""Precoder and receive-scaling design over parallel subcarriers.

Each feature dimension rides one subcarrier of a diagonal channel with real
gain |h_n| and circular noise of variance sigma_w^2.  The transmitter scales
dimension n by b_n >= 0 under the budget sum_n b_n^2 nu_n^2 <= P_c, where
nu_n^2 is the feature second moment; the receiver applies the MMSE scalar
a_n.  Two optimal allocations are provided, both water-filling structured:

* waterfill_mse  minimizes the total reconstruction MSE,
* waterfill_dg   maximizes the total discriminant gain (DG).

Per subcarrier, with G_n = |h_n| b_n and class variance sigma_n^2,

    DG_n = G_n^2 delta_n^2 / (G_n^2 sigma_n^2 + sigma_w^2),

which does not depend on the receive scaling.  Under sensing noise callers
pass the inflated variances sigma~_n^2 in place of sigma_n^2; the same
vector doubles as the signal power of the MMSE scaling.

The shared water level is solved by bisection on the Lagrange multiplier:
both optimal power profiles are piecewise linear in t = lambda**-0.5,

    power_n(t) = s_n * max(t - thr_n, 0),

    MSE:  s_n = sigma_w nu_n / |h_n|,              thr_n = sigma_w nu_n / (sigma_n^2 |h_n|)
    DG:   s_n = sigma_w nu_n |delta_n| / (sigma_n^2 |h_n|),  thr_n = sigma_w nu_n / (|delta_n| |h_n|)

so the budget equation has a unique root whenever any slope is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelRealization",
    "TransceiverDesign",
    "WaterfillError",
    "GAIN_FLOOR",
    "mmse_scaling",
    "single_carrier_mse_design",
    "single_carrier_dg",
    "waterfill_mse",
    "waterfill_dg",
    "achieved_dg",
]

# Gains at or below this are treated as absent subcarriers.
GAIN_FLOOR = 1e-12

_POWER_TOL = 1e-12  # budget residual target, relative to the budget
_POWER_FEAS_RTOL = 1e-9  # hard feasibility bound when the bracket bottoms out
_MAX_BISECT = 200
_MAX_BRACKET = 1000  # keeps lambda away from float under/overflow


def _geo_mid(lo, hi):
    # sqrt separately so the product cannot under- or overflow
    return np.sqrt(lo) * np.sqrt(hi)


class WaterfillError(RuntimeError):
    """Water-level search failed; carries solver diagnostics."""

    def __init__(self, message, *, rows=None, residuals=None, iterations=None):
        super().__init__(message)
        self.rows = rows
        self.residuals = residuals
        self.iterations = iterations


@dataclass(frozen=True)
class ChannelRealization:
    """Diagonal channel: nonnegative real gains plus the noise floor sigma_w^2."""

    gains: np.ndarray
    noise_power: float

    def __post_init__(self):
        gains = np.array(self.gains, dtype=float)
        gains.setflags(write=False)
        if gains.ndim != 1:
            raise ValueError("gains must be a 1-D vector")
        if np.any(gains < 0.0):
            raise ValueError("gains must be nonnegative")
        if not self.noise_power > 0.0:
            raise ValueError("noise_power must be positive")
        object.__setattr__(self, "gains", gains)

    @property
    def num_subcarriers(self) -> int:
        return self.gains.shape[0]


@dataclass(frozen=True)
class TransceiverDesign:
    """Result of a precoder design.

    precoders b_n and scalings a_n are per subcarrier; water_level is the
    Lagrange multiplier lambda of the power constraint (inf for a degenerate
    all-zero design); power is the budget actually spent.
    """

    precoders: np.ndarray
    scalings: np.ndarray
    water_level: float
    criterion: str
    power: float
    status: str = "ok"

    def __post_init__(self):
        pre = np.array(self.precoders, dtype=float)
        sca = np.array(self.scalings, dtype=float)
        pre.setflags(write=False)
        sca.setflags(write=False)
        if pre.shape != sca.shape or pre.ndim != 1:
            raise ValueError("precoders and scalings must be 1-D of equal length")
        object.__setattr__(self, "precoders", pre)
        object.__setattr__(self, "scalings", sca)

    @property
    def active(self) -> np.ndarray:
        return self.precoders > 0.0


def mmse_scaling(gain: float, precoder: float, signal_power: float, noise_power: float) -> float:
    """MMSE receive scalar a* = G s / (G^2 s + sigma_w^2), G = gain * precoder.

    signal_power is the variance of the transmitted symbol around its mean
    (the effective class variance).  Returns 0 for an inactive subcarrier.
    """
    G = float(gain) * float(precoder)
    if G == 0.0:
        return 0.0
    return G * signal_power / (G * G * signal_power + noise_power)


def single_carrier_mse_design(
    gain: float, second_moment: float, noise_power: float, power: float
) -> tuple[float, float, float]:
    """Optimal (b, a, mse) for one subcarrier: full power is always best.

    mse = nu^2 sigma_w^2 / (|h|^2 P + sigma_w^2), evaluated at b = sqrt(P / nu^2)
    with the MMSE scaling for signal power nu^2 (mean included; the single
    carrier form measures reconstruction of the whole symbol).
    """
    if not power > 0.0:
        raise ValueError("power must be positive")
    if not second_moment > 0.0:
        raise ValueError("second_moment must be positive")
    b = float(np.sqrt(power / second_moment))
    a = mmse_scaling(gain, b, second_moment, noise_power)
    mse = second_moment * noise_power / (gain * gain * power + noise_power)
    return b, a, mse


def single_carrier_dg(
    gain: float,
    power: float,
    mean_gap_sq: float,
    class_variance: float,
    second_moment: float,
    noise_power: float,
) -> float:
    """Best single-carrier discriminant gain at full power.

    DG* = |h|^2 P delta^2 / (|h|^2 P sigma^2 + sigma_w^2 nu^2); monotone in P,
    saturating at delta^2 / sigma^2.  power = 0 is allowed and gives 0.
    """
    if power < 0.0:
        raise ValueError("power must be nonnegative")
    num = gain * gain * power * mean_gap_sq
    den = gain * gain * power * class_variance + noise_power * second_moment
    return num / den


# ---------------------------------------------------------------------------
# Water-filling core
# ---------------------------------------------------------------------------

def _water_solve(slopes: np.ndarray, thresholds: np.ndarray, power: float):
    """Solve sum_n s_n (lambda**-0.5 - thr_n)^+ = power per row by bisection.

    slopes and thresholds are (B, N); rows must have at least one positive
    slope.  Returns (lam, per_power) with lam (B,) and per_power (B, N).
    Bracket grows by doubling/halving from lambda = 1, then log-space
    bisection down to a budget residual of 1e-12 relative to the budget,
    capped at 200 iterations.  A row whose bracket collapses to float
    resolution first is accepted as long as its residual meets the looser
    feasibility bound of 1e-9 relative; anything worse raises WaterfillError
    with diagnostics.
    """
    B = slopes.shape[0]
    tol = _POWER_TOL * max(1.0, power)
    feas = _POWER_FEAS_RTOL * max(1.0, power)

    def budget(lam):
        t = lam**-0.5
        return np.sum(slopes * np.clip(t[:, None] - thresholds, 0.0, None), axis=1)

    lam_lo = np.ones(B)  # low lambda -> high power
    lam_hi = np.ones(B)
    pw1 = budget(np.ones(B))
    need_up = pw1 > power  # too much power, raise lambda
    need_dn = pw1 < power
    for _ in range(_MAX_BRACKET):
        if need_up.any():
            lam_hi[need_up] *= 2.0
            need_up &= budget(lam_hi) > power
        if need_dn.any():
            lam_lo[need_dn] *= 0.5
            need_dn &= budget(lam_lo) < power
        if not (need_up.any() or need_dn.any()):
            break
    else:
        rows = np.nonzero(need_up | need_dn)[0]
        raise WaterfillError(
            f"bracket search failed for {rows.size} rows", rows=rows, iterations=_MAX_BRACKET
        )

    lam = _geo_mid(lam_lo, lam_hi)
    resid = budget(lam) - power
    collapsed = lam_hi - lam_lo <= 4.0 * np.finfo(float).eps * lam_lo
    done = (np.abs(resid) <= tol) | collapsed
    it = 0
    while not done.all() and it < _MAX_BISECT:
        too_high_power = resid > 0.0  # lambda too small
        lam_lo = np.where(~done & too_high_power, lam, lam_lo)
        lam_hi = np.where(~done & ~too_high_power, lam, lam_hi)
        lam = np.where(done, lam, _geo_mid(lam_lo, lam_hi))
        resid = np.where(done, resid, budget(lam) - power)
        collapsed = lam_hi - lam_lo <= 4.0 * np.finfo(float).eps * lam_lo
        done = (np.abs(resid) <= tol) | collapsed
        it += 1
    bad = np.abs(resid) > feas
    if bad.any():
        rows = np.nonzero(bad)[0]
        raise WaterfillError(
            f"water level not converged for {rows.size} rows after {it} bisection steps "
            f"(worst residual {np.max(np.abs(resid[rows])):.3e}, "
            f"feasibility tol {feas:.3e})",
            rows=rows,
            residuals=resid[rows],
            iterations=it,
        )
    t = lam**-0.5
    per_power = slopes * np.clip(t[:, None] - thresholds, 0.0, None)
    return lam, per_power


def _mse_slopes(gains, second_moments, class_variances, noise_power):
    s_w = np.sqrt(noise_power)
    nu = np.sqrt(second_moments)
    ok = gains > GAIN_FLOOR
    g = np.where(ok, gains, 1.0)
    slopes = np.where(ok, s_w * nu / g, 0.0)
    thr = np.where(ok, s_w * nu / (class_variances * g), np.inf)
    return slopes, thr


def _dg_slopes(gains, second_moments, class_variances, mean_gaps_sq, noise_power):
    s_w = np.sqrt(noise_power)
    nu = np.sqrt(second_moments)
    gap = np.sqrt(mean_gaps_sq)
    ok = (gains > GAIN_FLOOR) & (gap > 0.0)
    g = np.where(ok, gains, 1.0)
    safe_gap = np.where(ok, gap, 1.0)
    slopes = np.where(ok, s_w * nu * safe_gap / (class_variances * g), 0.0)
    thr = np.where(ok, s_w * nu / (safe_gap * g), np.inf)
    return slopes, thr


def waterfill_batch(
    gains: np.ndarray,
    second_moments: np.ndarray,
    class_variances: np.ndarray,
    noise_power: float,
    power: float,
    criterion: str,
    mean_gaps_sq: np.ndarray | None = None,
):
    """Vectorized water-filling over a batch of channel draws.

    gains is (B, N); the model vectors are (N,).  Returns (b, a, lam) with
    b, a of shape (B, N).  Rows where every subcarrier is unusable raise
    WaterfillError (the row index identifies the offending draw).
    """
    gains = np.atleast_2d(np.asarray(gains, dtype=float))
    nu2 = np.asarray(second_moments, dtype=float)
    var = np.asarray(class_variances, dtype=float)
    if criterion == "MSE":
        slopes, thr = _mse_slopes(gains, nu2, var, noise_power)
    elif criterion == "DG":
        if mean_gaps_sq is None:
            raise ValueError("DG criterion needs mean_gaps_sq")
        slopes, thr = _dg_slopes(gains, nu2, var, np.asarray(mean_gaps_sq, float), noise_power)
    else:
        raise ValueError(f"unknown criterion {criterion!r}")

    dead = ~np.any(slopes > 0.0, axis=1)
    if dead.any():
        rows = np.nonzero(dead)[0]
        raise WaterfillError(f"no usable subcarrier in rows {rows[:8]}", rows=rows)

    lam, per_power = _water_solve(slopes, thr, power)
    q = per_power / nu2
    b = np.sqrt(q)
    G = gains * b
    a = np.where(G > 0.0, G * var / (G * G * var + noise_power), 0.0)
    return b, a, lam


def _single_design(channel, second_moments, class_variances, power, criterion, mean_gaps_sq=None):
    if not power > 0.0:
        raise ValueError("power must be positive")
    nu2 = np.asarray(second_moments, dtype=float)
    var = np.asarray(class_variances, dtype=float)
    n = channel.num_subcarriers
    if nu2.shape != (n,) or var.shape != (n,):
        raise ValueError("second_moments and class_variances must match the channel length")
    if not np.all(nu2 > 0.0) or not np.all(var > 0.0):
        raise ValueError("moments and variances must be positive")
    if not np.any(channel.gains > GAIN_FLOOR):
        raise ValueError("all channel gains are below the usable floor")
    if criterion == "DG":
        gaps = np.asarray(mean_gaps_sq, dtype=float)
        if gaps.shape != (n,):
            raise ValueError("mean_gaps_sq must match the channel length")
        if np.any(gaps < 0.0):
            raise ValueError("mean_gaps_sq must be nonnegative")
        if not np.any(gaps > 0.0):
            # No informative dimension: spending power cannot help.
            zero = np.zeros(n)
            return TransceiverDesign(
                precoders=zero,
                scalings=zero,
                water_level=np.inf,
                criterion="DG",
                power=0.0,
                status="degenerate",
            )
    b, a, lam = waterfill_batch(
        channel.gains[None, :], nu2, var, channel.noise_power, power, criterion, mean_gaps_sq
    )
    spent = float(np.sum(b[0] ** 2 * nu2))
    return TransceiverDesign(
        precoders=b[0],
        scalings=a[0],
        water_level=float(lam[0]),
        criterion=criterion,
        power=spent,
    )


def waterfill_mse(
    channel: ChannelRealization,
    second_moments: np.ndarray,
    class_variances: np.ndarray,
    power: float,
) -> TransceiverDesign:
    """MSE-optimal power allocation across subcarriers.

    Under sensing noise pass the inflated variances sigma~^2 as
    class_variances; they set both the water-filling thresholds and the MMSE
    scaling signal power.  The budget is met with equality.
    """
    return _single_design(channel, second_moments, class_variances, power, "MSE")


def waterfill_dg(
    channel: ChannelRealization,
    second_moments: np.ndarray,
    class_variances: np.ndarray,
    mean_gaps_sq: np.ndarray,
    power: float,
) -> TransceiverDesign:
    """DG-optimal power allocation across subcarriers.

    Subcarriers with zero mean gap never receive power; if every gap is zero
    the all-zero design is returned with status "degenerate".  Otherwise the
    budget is met with equality.
    """
    return _single_design(channel, second_moments, class_variances, power, "DG", mean_gaps_sq)


def achieved_dg(
    design: TransceiverDesign,
    channel: ChannelRealization,
    effective_variances: np.ndarray,
    mean_gaps_sq: np.ndarray,
):
    """Per-subcarrier and total discriminant gain of a concrete design.

    DG_n = G_n^2 delta_n^2 / (G_n^2 sigma~_n^2 + sigma_w^2) with
    G_n = |h_n| b_n; invariant to the receive scalings.
    """
    G = channel.gains * design.precoders
    var = np.asarray(effective_variances, dtype=float)
    gaps = np.asarray(mean_gaps_sq, dtype=float)
    per = G**2 * gaps / (G**2 * var + channel.noise_power)
    return per, float(per.sum())
