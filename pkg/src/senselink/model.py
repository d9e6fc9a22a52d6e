"""Gaussian-mixture feature model and sensing-side statistics.

The source being sensed emits a feature vector x of dimension M whose class
label is one of L hypotheses.  Conditioned on class l the features are
independent complex Gaussians with real means mu[l, m] and a shared
per-dimension variance sigma2[m].  Sensing at power P_r adds circular noise
of variance sigma_r^2 / P_r on every dimension, so the transmitter observes

    x~_m = x_m + d_m,   d_m ~ CN(0, sigma_r^2 / P_r).

All variances here are total complex variances (real and imaginary parts
each carry half).  Channel phase is assumed compensated at the transmitter,
which is why means stay real while noise is complex.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FeatureModel",
    "SensingConfig",
    "PowerBudget",
    "effective_variances",
    "feature_second_moments",
    "pairwise_mean_gaps",
    "sample_features",
    "synthesize_model",
    "save_model",
    "load_model",
    "DEFAULT_MODEL_SEED",
]

# Fixed seed of the default heterogeneous model shipped with the package.
DEFAULT_MODEL_SEED = 20240811


def _readonly(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FeatureModel:
    """L-class Gaussian-mixture feature source.

    Parameters
    ----------
    means : array_like, shape (L, M)
        Real class-conditional means, one row per class.
    variances : array_like, shape (M,)
        Per-dimension complex variances, strictly positive, shared by all
        classes (diagonal covariance).
    priors : array_like, shape (L,)
        Class prior probabilities; nonnegative, summing to one within 1e-12.
    """

    means: np.ndarray
    variances: np.ndarray
    priors: np.ndarray

    def __post_init__(self):
        means = _readonly(np.atleast_2d(self.means))
        variances = _readonly(self.variances)
        priors = _readonly(self.priors)
        if means.ndim != 2:
            raise ValueError("means must be a 2-D array of shape (L, M)")
        L, M = means.shape
        if variances.shape != (M,):
            raise ValueError(f"variances must have shape ({M},), got {variances.shape}")
        if priors.shape != (L,):
            raise ValueError(f"priors must have shape ({L},), got {priors.shape}")
        if not np.all(variances > 0.0):
            raise ValueError("variances must be strictly positive")
        if np.any(priors < 0.0):
            raise ValueError("priors must be nonnegative")
        if abs(float(priors.sum()) - 1.0) > 1e-12:
            raise ValueError("priors must sum to 1 within 1e-12")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "priors", priors)

    @property
    def num_classes(self) -> int:
        return self.means.shape[0]

    @property
    def num_dims(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class SensingConfig:
    """Sensing-noise level and the power spent on sensing.

    noise_power is sigma_r^2, the unit-power sensing noise variance; the
    realized distortion on each feature is noise_power / power.
    """

    noise_power: float
    power: float

    def __post_init__(self):
        if not self.noise_power > 0.0:
            raise ValueError("sensing noise_power must be positive")
        if not self.power > 0.0:
            raise ValueError("sensing power must be positive")

    @property
    def noise_ratio(self) -> float:
        """Per-dimension sensing distortion sigma_r^2 / P_r."""
        return self.noise_power / self.power


@dataclass(frozen=True)
class PowerBudget:
    """Total transmit budget P split between sensing and communication.

    split_ratio is the communication fraction beta in (0, 1):
    P_c = beta * P, P_r = (1 - beta) * P.
    """

    total: float
    split_ratio: float

    def __post_init__(self):
        if not self.total > 0.0:
            raise ValueError("total power must be positive")
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError("split_ratio must lie strictly inside (0, 1)")

    @property
    def communication(self) -> float:
        return self.split_ratio * self.total

    @property
    def sensing(self) -> float:
        return (1.0 - self.split_ratio) * self.total

    def sensing_config(self, noise_power: float) -> SensingConfig:
        """SensingConfig for this budget's sensing share."""
        return SensingConfig(noise_power=noise_power, power=self.sensing)


def effective_variances(model: FeatureModel, sensing: SensingConfig | None) -> np.ndarray:
    """Class-conditional variances inflated by the sensing distortion.

    Returns sigma~_m^2 = sigma_m^2 + sigma_r^2 / P_r.  sensing=None is the
    noiseless-sensing limit and returns the model variances unchanged.
    """
    ratio = 0.0 if sensing is None else sensing.noise_ratio
    return np.asarray(model.variances, dtype=float) + ratio


def feature_second_moments(model: FeatureModel, sensing: SensingConfig | None) -> np.ndarray:
    """Per-dimension second moments nu_m^2 = E|x~_m|^2 of the sensed features.

    nu_m^2 = sum_l pi_l mu[l, m]^2 + sigma_m^2 + sigma_r^2 / P_r.  These are
    the weights of the transmit power constraint and must be recomputed
    whenever the power split changes.
    """
    mean_sq = model.priors @ (model.means**2)
    return mean_sq + effective_variances(model, sensing)


def _pair_iter(num_classes: int):
    return itertools.combinations(range(num_classes), 2)


def _worst_pair(means: np.ndarray, variances: np.ndarray) -> tuple[int, int]:
    """Class pair minimizing the total per-dimension discriminant gain.

    Ties break to the lexicographically smallest pair.
    """
    best = None
    best_val = np.inf
    for i, j in _pair_iter(means.shape[0]):
        val = float(np.sum((means[i] - means[j]) ** 2 / variances))
        if val < best_val:
            best_val = val
            best = (i, j)
    return best


def gaps_for_variances(means: np.ndarray, variances: np.ndarray, mode: str) -> np.ndarray:
    """Squared per-dimension mean gaps under an explicit variance vector.

    The variance vector only steers worst-pair selection; the returned gaps
    are squared mean differences.  Used with sensing-inflated variances by
    the simulation engine.
    """
    means = np.asarray(means, dtype=float)
    if means.shape[0] < 2:
        raise ValueError("need at least two classes to form mean gaps")
    if mode == "worst_pair":
        i, j = _worst_pair(means, np.asarray(variances, dtype=float))
        return (means[i] - means[j]) ** 2
    if mode == "average_pairs":
        pairs = list(_pair_iter(means.shape[0]))
        acc = np.zeros(means.shape[1])
        for i, j in pairs:
            acc += (means[i] - means[j]) ** 2
        return acc / len(pairs)
    raise ValueError(f"unknown gap mode {mode!r}")


def pairwise_mean_gaps(model: FeatureModel, mode: str = "worst_pair") -> np.ndarray:
    """Squared class-mean gaps delta_m^2 used by the precoder designs.

    mode="worst_pair" (default) returns the gaps of the class pair with the
    smallest total discriminant gain under the model variances, ties broken
    toward the lowest class indices; mode="average_pairs" averages the
    squared gaps over all unordered pairs.
    """
    return gaps_for_variances(model.means, model.variances, mode)


def sample_features(
    model: FeatureModel,
    sensing: SensingConfig | None,
    class_label: int,
    rng: np.random.Generator,
    size: int | None = None,
) -> np.ndarray:
    """Draw sensed feature vectors x~ for a given class.

    Returns a complex vector of shape (M,) by default, or (size, M) when
    size is given: the class mean plus circular Gaussian noise of variance
    sigma_m^2 + sigma_r^2 / P_r per dimension.  The generator is the only
    source of randomness, so equal seeds reproduce equal draws.
    """
    label = int(class_label)
    if not 0 <= label < model.num_classes:
        raise ValueError(f"class_label {class_label} outside [0, {model.num_classes})")
    var = effective_variances(model, sensing)
    scale = np.sqrt(var / 2.0)
    shape = (model.num_dims,) if size is None else (int(size), model.num_dims)
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return model.means[label] + scale * noise


# ---------------------------------------------------------------------------
# Synthetic default model
# ---------------------------------------------------------------------------

def synthesize_model(
    num_classes: int = 4,
    num_dims: int = 8,
    seed: int = DEFAULT_MODEL_SEED,
    *,
    total_dg: float = 16.0,
    gap_jitter: float = 1.08,
    var_range: tuple[float, float] = (0.05, 0.5),
) -> FeatureModel:
    """Build the default heterogeneous Gaussian-mixture model.

    Class means sit on one line in feature space,

        mu_{l,m} = w_m + (a_l - a_bar) * v_m,

    so every class pair's per-dimension gap is proportional to the same
    profile v: one power allocation is simultaneously optimal for all pairs,
    both gap-aggregation modes select identical designs, and raising the
    design objective raises every pairwise discriminant gain at once.  The
    class coordinates a_l grow by increments 1, 1.1, 1.2, ... so the pair
    (0, 1) has the smallest separation and is the worst pair for any noise
    level.

    Variances are log-uniform over var_range and the profile is pinned to

        v_m = u_bar * jitter_m * sigma_m^2,

    with jitter_m log-uniform in [1/gap_jitter, gap_jitter] and u_bar chosen
    in closed form so the worst pair's total discriminant gain equals
    total_dg.  Per-dimension gains then spread a decade through the
    variances, while the gap-to-variance ratio stays inside the jitter band:
    the two precoder designs agree at high power yet their active sets
    diverge at low power, where the ratio differences flip marginal
    dimensions.  The per-dimension offsets w_m decouple transmit cost
    (second moments) from informativeness so neither design's thresholds
    collapse onto the other's.
    """
    if num_classes < 2:
        raise ValueError("need at least two classes")
    rng = np.random.default_rng(seed)
    lo, hi = var_range
    if not 0.0 < lo <= hi:
        raise ValueError("var_range must be positive and ordered")
    variances = np.exp(rng.uniform(np.log(lo), np.log(hi), size=num_dims))
    jitter = gap_jitter ** rng.uniform(-1.0, 1.0, size=num_dims)
    offset_draw = rng.uniform(-1.5, 1.5, size=num_dims)

    # u_bar from sum_m (1 * v_m)^2 / sigma_m^2 = total_dg for the worst pair
    u_bar = np.sqrt(total_dg / float(np.sum(jitter**2 * variances)))
    profile = u_bar * jitter * variances

    coords = np.concatenate([[0.0], np.cumsum(1.0 + 0.1 * np.arange(num_classes - 1))])
    priors = np.full(num_classes, 1.0 / num_classes)
    coords -= priors @ coords
    spread = np.sqrt(priors @ coords**2)
    offsets = offset_draw * spread * np.sqrt(np.mean(profile**2))

    means = offsets + np.outer(coords, profile)
    return FeatureModel(means=means, variances=variances, priors=priors)


# ---------------------------------------------------------------------------
# Model file round-trip (JSON, the on-disk interface of gen-model)
# ---------------------------------------------------------------------------

def save_model(model: FeatureModel, path) -> None:
    """Write a model to JSON with row-major means; deterministic bytes."""
    payload = {
        "num_classes": model.num_classes,
        "num_dims": model.num_dims,
        "means": [[float(v) for v in row] for row in model.means],
        "variances": [float(v) for v in model.variances],
        "priors": [float(v) for v in model.priors],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> FeatureModel:
    """Read a model written by save_model, validating shape consistency."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        means = np.array(payload["means"], dtype=float)
        variances = np.array(payload["variances"], dtype=float)
        priors = np.array(payload["priors"], dtype=float)
        L = int(payload["num_classes"])
        M = int(payload["num_dims"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model file {path}: {exc}") from exc
    if means.shape != (L, M):
        raise ValueError(
            f"model file {path}: means shape {means.shape} contradicts "
            f"num_classes={L}, num_dims={M}"
        )
    return FeatureModel(means=means, variances=variances, priors=priors)
