"""Monte Carlo link simulation: sense, precode, transmit, classify.

Per trial: a class label is drawn from the priors, the sensed feature
vector is formed with sensing noise folded into its variance, a fresh
channel is drawn, the precoder is redesigned for that channel, and the ML
classifier runs on the received symbols.  Everything is vectorized over
fixed-size chunks of trials; chunk c uses its own generator seeded from
SeedSequence([seed, c]), so results are reproducible bit for bit and do not
depend on how many chunks run.  Within a run the chunk draws are shared by
every design criterion (paired comparison), and because the channel stream
never depends on the swept variable, grid points are paired too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import q_function
from .model import FeatureModel, SensingConfig, PowerBudget, effective_variances, \
    feature_second_moments, gaps_for_variances
from .transceiver import ChannelRealization, WaterfillError, waterfill_batch

__all__ = [
    "ChannelModel",
    "SimConfig",
    "SweepRow",
    "SweepResult",
    "CellStats",
    "sample_channel",
    "transmit_and_receive",
    "ml_classify",
    "estimate_error",
    "sweep_power",
    "sweep_beta",
    "paired_design_draws",
]

CHUNK_TRIALS = 8192


@dataclass(frozen=True)
class ChannelModel:
    """Channel law for the simulation.

    kind "rayleigh_unit": gains |h_n| with |h_n|^2 ~ Exp(1) iid, fresh per
    trial.  kind "fixed_gains": the given gain vector every trial.
    noise_power is sigma_w^2.
    """

    kind: str
    noise_power: float
    num_subcarriers: int | None = None
    gains: np.ndarray | None = None

    def __post_init__(self):
        if not self.noise_power > 0.0:
            raise ValueError("noise_power must be positive")
        if self.kind == "rayleigh_unit":
            if not self.num_subcarriers or self.num_subcarriers < 1:
                raise ValueError("rayleigh_unit needs num_subcarriers >= 1")
        elif self.kind == "fixed_gains":
            g = np.array(self.gains, dtype=float)
            if g.ndim != 1 or g.size < 1:
                raise ValueError("fixed_gains needs a 1-D gain vector")
            if np.any(g < 0.0):
                raise ValueError("gains must be nonnegative")
            g.setflags(write=False)
            object.__setattr__(self, "gains", g)
            object.__setattr__(self, "num_subcarriers", int(g.size))
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    @classmethod
    def rayleigh(cls, num_subcarriers: int, noise_power: float) -> "ChannelModel":
        return cls(kind="rayleigh_unit", noise_power=noise_power, num_subcarriers=num_subcarriers)

    @classmethod
    def fixed(cls, gains, noise_power: float) -> "ChannelModel":
        return cls(kind="fixed_gains", noise_power=noise_power, gains=gains)


@dataclass(frozen=True)
class SimConfig:
    """Trial count, seed, channel law, and optional default sweep grid."""

    num_trials: int
    rng_seed: int
    channel_model: ChannelModel
    sweep_grid: tuple | None = None
    aggregation: str = "worst_pair"

    def __post_init__(self):
        if self.num_trials < 1:
            raise ValueError("num_trials must be >= 1")
        if not 0 <= int(self.rng_seed) < 2**63:
            raise ValueError("rng_seed must be a nonnegative 63-bit integer")
        if self.sweep_grid is not None:
            grid = tuple(float(v) for v in self.sweep_grid)
            if len(grid) < 1:
                raise ValueError("sweep_grid must be nonempty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError("sweep_grid must be strictly increasing")
            object.__setattr__(self, "sweep_grid", grid)
        if self.aggregation not in ("worst_pair", "average_pairs"):
            raise ValueError(f"unknown aggregation {self.aggregation!r}")


@dataclass(frozen=True)
class SweepRow:
    value: float
    criterion: str
    total_dg_mean: float
    error_bound: float
    accuracy: float
    stderr: float
    valid: bool = True


@dataclass(frozen=True)
class SweepResult:
    axis: str
    rows: tuple[SweepRow, ...]
    argmax: dict | None = None


@dataclass(frozen=True)
class CellStats:
    error: float
    accuracy: float
    stderr: float
    total_dg_mean: float
    error_bound_mean: float


def sample_channel(config, rng: np.random.Generator) -> ChannelRealization:
    """Draw one ChannelRealization from a ChannelModel (or SimConfig)."""
    cm = config.channel_model if isinstance(config, SimConfig) else config
    if cm.kind == "fixed_gains":
        return ChannelRealization(gains=cm.gains, noise_power=cm.noise_power)
    gains = np.sqrt(rng.standard_exponential(cm.num_subcarriers))
    return ChannelRealization(gains=gains, noise_power=cm.noise_power)


def _identity_assignment(m: int) -> np.ndarray:
    return np.arange(m)


def transmit_and_receive(features, design, channel, rng, assignment=None):
    """One pass through the link: x_hat = a * (|h| b x~ + w), complex.

    features has length M <= N; assignment maps feature index to subcarrier
    (default: the first M subcarriers).  Returns the length-N scaled
    receive vector; subcarriers without a feature carry only scaled noise.
    """
    x = np.asarray(features)
    n = channel.num_subcarriers
    m = x.shape[0]
    if m > n:
        raise ValueError("more features than subcarriers")
    idx = _identity_assignment(m) if assignment is None else np.asarray(assignment, int)
    scale = math.sqrt(channel.noise_power / 2.0)
    w = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    y = w.astype(complex)
    y[idx] += channel.gains[idx] * design.precoders[idx] * x
    return design.scalings * y


def ml_classify(x_hat, model, design, channel, sensing=None, assignment=None):
    """Maximum-likelihood class decision from the scaled receive vector.

    Post-channel statistics per active subcarrier n carrying feature f:
    mean a_n |h_n| b_n mu[l, f], complex variance
    a_n^2 ((|h_n| b_n)^2 sigma~_f^2 + sigma_w^2).  Inactive subcarriers are
    ignored.  Ties (e.g. nothing active) resolve to the lowest label.
    """
    x_hat = np.asarray(x_hat)
    m = model.num_dims
    idx = _identity_assignment(m) if assignment is None else np.asarray(assignment, int)
    eff = effective_variances(model, sensing)
    a = design.scalings[idx]
    G = channel.gains[idx] * design.precoders[idx]
    active = (a > 0.0) & (G > 0.0)
    if not np.any(active):
        return 0
    var = a**2 * (G**2 * eff + channel.noise_power)
    obs = x_hat[idx][active]
    means = (a * G)[active] * model.means[:, active]
    dist = np.sum(np.abs(obs[None, :] - means) ** 2 / var[active], axis=1)
    return int(np.argmin(dist))


# ---------------------------------------------------------------------------
# Vectorized engine
# ---------------------------------------------------------------------------

def _pair_gap_matrix(means: np.ndarray) -> np.ndarray:
    """Squared mean differences for every unordered class pair, (P, M)."""
    L = means.shape[0]
    rows = [
        (means[i] - means[j]) ** 2
        for i in range(L)
        for j in range(i + 1, L)
    ]
    return np.asarray(rows)


def _chunk_sizes(total: int):
    sizes = [CHUNK_TRIALS] * (total // CHUNK_TRIALS)
    if total % CHUNK_TRIALS:
        sizes.append(total % CHUNK_TRIALS)
    return sizes


class _CellAccumulator:
    def __init__(self):
        self.errors = 0
        self.dg_sum = 0.0
        self.bound_sum = 0.0
        self.count = 0

    def stats(self) -> CellStats:
        err = self.errors / self.count
        stderr = math.sqrt(err * (1.0 - err) / self.count)
        return CellStats(
            error=err,
            accuracy=1.0 - err,
            stderr=stderr,
            total_dg_mean=self.dg_sum / self.count,
            error_bound_mean=self.bound_sum / self.count,
        )


def _run_cell(
    model: FeatureModel,
    eff_var: np.ndarray,
    nu2: np.ndarray,
    gaps: np.ndarray,
    channel_model: ChannelModel,
    power: float,
    criteria: tuple[str, ...],
    num_trials: int,
    seed: int,
):
    """Simulate one sweep cell for all criteria on shared draws."""
    L, M = model.means.shape
    N = channel_model.num_subcarriers
    if M > N:
        raise ValueError(f"model has {M} dims but the channel only {N} subcarriers")
    sw2 = channel_model.noise_power
    w_scale = math.sqrt(sw2 / 2.0)
    cum_priors = np.cumsum(model.priors)
    feat_scale = np.sqrt(eff_var / 2.0)
    mu = model.means
    mu_sq = mu**2
    pair_gaps = _pair_gap_matrix(mu)
    dg_degenerate = not np.any(gaps > 0.0)

    def design_G(g_sel, crit, offset):
        # per-feature effective gains G = |h| b; (rows, M)
        rows = g_sel.shape[0]
        if power == 0.0 or (crit == "DG" and dg_degenerate):
            return np.zeros((rows, M))
        try:
            b, _, _ = waterfill_batch(g_sel, nu2, eff_var, sw2, power, crit, gaps)
        except WaterfillError as exc:
            first = offset + (int(exc.rows[0]) if exc.rows is not None else 0)
            raise WaterfillError(
                f"design failed at trial {first}: {exc}", rows=exc.rows
            ) from exc
        return g_sel * b

    fixed_designs = None
    if channel_model.kind == "fixed_gains":
        g_row = channel_model.gains[None, :]
        if M != N:
            g_row = np.take_along_axis(g_row, _select_subcarriers(g_row, M), axis=1)
        fixed_designs = {crit: design_G(g_row, crit, 0) for crit in criteria}

    acc = {crit: _CellAccumulator() for crit in criteria}
    offset = 0
    for chunk_index, B in enumerate(_chunk_sizes(num_trials)):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(chunk_index)]))
        labels = np.searchsorted(cum_priors, rng.random(B), side="right")
        labels = np.minimum(labels, L - 1)
        feat = rng.standard_normal((B, M, 2))
        if fixed_designs is None:
            gains = np.sqrt(rng.standard_exponential((B, N)))
        wnoise = rng.standard_normal((B, M, 2))

        xre = mu[labels] + feat_scale * feat[:, :, 0]

        if fixed_designs is not None:
            G_by_crit = fixed_designs
        else:
            if M == N:
                g_sel = gains
            else:
                g_sel = np.take_along_axis(gains, _select_subcarriers(gains, M), axis=1)
            G_by_crit = {crit: design_G(g_sel, crit, offset) for crit in criteria}

        for crit in criteria:
            G = G_by_crit[crit]  # (B, M) or broadcastable (1, M)
            var = G**2 * eff_var + sw2
            active = G > 0.0
            wgt = np.where(active, 1.0 / var, 0.0)
            zre = G * xre + w_scale * wnoise[:, :, 0]  # (B, M)
            score = (wgt * G * zre) @ (-2.0 * mu.T) + (wgt * G**2) @ mu_sq.T
            pred = np.argmin(score, axis=1)
            k = np.where(active, G**2 / var, 0.0)
            dg_trial = k @ gaps  # (rows,)
            dg_min = (k @ pair_gaps.T).min(axis=1)
            bound = (L - 1) * q_function(np.sqrt(dg_min / 2.0))
            a = acc[crit]
            a.errors += int(np.count_nonzero(pred != labels))
            if dg_trial.shape[0] == B:
                a.dg_sum += float(dg_trial.sum())
                a.bound_sum += float(np.sum(bound))
            else:
                a.dg_sum += float(dg_trial[0]) * B
                a.bound_sum += float(np.asarray(bound).reshape(-1)[0]) * B
            a.count += B
        offset += B

    return {crit: acc[crit].stats() for crit in criteria}


def _select_subcarriers(gains: np.ndarray, m: int) -> np.ndarray:
    """Indices of the M strongest subcarriers per row, ascending order.

    Ties go to the lower subcarrier index; with M == N this is the identity.
    """
    n = gains.shape[1]
    if m == n:
        return np.broadcast_to(np.arange(n), gains.shape)
    order = np.argsort(-gains, axis=1, kind="stable")[:, :m]
    return np.sort(order, axis=1)


def _criteria_tuple(criterion: str) -> tuple[str, ...]:
    if criterion == "both":
        return ("MSE", "DG")
    if criterion in ("MSE", "DG"):
        return (criterion,)
    raise ValueError(f"unknown criterion {criterion!r}")


def _derived_stats(model, sensing, aggregation):
    eff = effective_variances(model, sensing)
    nu2 = feature_second_moments(model, sensing)
    gaps = gaps_for_variances(model.means, eff, aggregation)
    return eff, nu2, gaps


def estimate_error(
    model: FeatureModel,
    sensing: SensingConfig,
    budget: PowerBudget,
    criterion: str,
    sim_config: SimConfig,
) -> tuple[float, float]:
    """Monte Carlo classification error and its binomial standard error.

    The sensing share of the budget must match the SensingConfig; the
    communication share funds the precoder, which is redesigned for every
    channel draw.
    """
    if abs(sensing.power - budget.sensing) > 1e-9 * budget.total:
        raise ValueError(
            f"sensing power {sensing.power} inconsistent with budget split {budget.sensing}"
        )
    crit = _criteria_tuple(criterion)
    if len(crit) != 1:
        raise ValueError("estimate_error wants a single criterion, not 'both'")
    eff, nu2, gaps = _derived_stats(model, sensing, sim_config.aggregation)
    cells = _run_cell(
        model, eff, nu2, gaps, sim_config.channel_model, budget.communication,
        crit, sim_config.num_trials, sim_config.rng_seed,
    )
    cell = cells[crit[0]]
    return cell.error, cell.stderr


def sweep_power(
    model: FeatureModel,
    sensing: SensingConfig,
    criterion: str,
    grid=None,
    sim_config: SimConfig | None = None,
) -> SweepResult:
    """Error/DG statistics versus communication power at a fixed sensing setup.

    grid holds linear P_c values, strictly increasing; criterion may be
    "MSE", "DG", or "both" (both criteria then share every random draw).
    """
    if sim_config is None:
        raise ValueError("sim_config is required")
    grid = tuple(float(v) for v in (grid if grid is not None else sim_config.sweep_grid or ()))
    if not grid:
        raise ValueError("no sweep grid given")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be strictly increasing")
    if any(v <= 0.0 for v in grid):
        raise ValueError("communication powers must be positive")
    crits = _criteria_tuple(criterion)
    eff, nu2, gaps = _derived_stats(model, sensing, sim_config.aggregation)
    rows = []
    for p_c in grid:
        cells = _run_cell(
            model, eff, nu2, gaps, sim_config.channel_model, p_c,
            crits, sim_config.num_trials, sim_config.rng_seed,
        )
        for crit in crits:
            c = cells[crit]
            rows.append(
                SweepRow(
                    value=p_c,
                    criterion=crit,
                    total_dg_mean=c.total_dg_mean,
                    error_bound=c.error_bound_mean,
                    accuracy=c.accuracy,
                    stderr=c.stderr,
                )
            )
    return SweepResult(axis="p_c", rows=tuple(rows))


def sweep_beta(
    model: FeatureModel,
    sensing_noise_power: float,
    total_power: float,
    grid=None,
    criterion: str = "both",
    sim_config: SimConfig | None = None,
) -> SweepResult:
    """Error/DG statistics versus the communication split beta at fixed P.

    beta = 0 is simulated as the no-communication limit (all power senses,
    classifier sees nothing and defaults to the lowest label).  beta = 1
    would leave sensing without power; its row is emitted invalid with NaN
    metrics.  argmax reports, per criterion, the valid beta with the highest
    accuracy (ties to the lower beta).
    """
    if sim_config is None:
        raise ValueError("sim_config is required")
    if not total_power > 0.0:
        raise ValueError("total_power must be positive")
    if not sensing_noise_power > 0.0:
        raise ValueError("sensing_noise_power must be positive")
    grid = tuple(float(v) for v in (grid if grid is not None else sim_config.sweep_grid or ()))
    if not grid:
        raise ValueError("no sweep grid given")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be strictly increasing")
    if any(v < 0.0 or v > 1.0 for v in grid):
        raise ValueError("beta values must lie in [0, 1]")
    crits = _criteria_tuple(criterion)
    rows = []
    best = {c: (-1.0, None) for c in crits}
    for beta in grid:
        if beta >= 1.0:
            for crit in crits:
                rows.append(
                    SweepRow(
                        value=beta, criterion=crit, total_dg_mean=math.nan,
                        error_bound=math.nan, accuracy=math.nan, stderr=math.nan,
                        valid=False,
                    )
                )
            continue
        sensing = SensingConfig(noise_power=sensing_noise_power, power=(1.0 - beta) * total_power)
        eff, nu2, gaps = _derived_stats(model, sensing, sim_config.aggregation)
        cells = _run_cell(
            model, eff, nu2, gaps, sim_config.channel_model, beta * total_power,
            crits, sim_config.num_trials, sim_config.rng_seed,
        )
        for crit in crits:
            c = cells[crit]
            rows.append(
                SweepRow(
                    value=beta, criterion=crit, total_dg_mean=c.total_dg_mean,
                    error_bound=c.error_bound_mean, accuracy=c.accuracy,
                    stderr=c.stderr,
                )
            )
            if c.accuracy > best[crit][0]:
                best[crit] = (c.accuracy, beta)
    argmax = {crit: beta for crit, (_, beta) in best.items() if beta is not None}
    return SweepResult(axis="beta", rows=tuple(rows), argmax=argmax)


def paired_design_draws(
    model: FeatureModel,
    sensing: SensingConfig | None,
    channel_model: ChannelModel,
    power: float,
    num_draws: int,
    seed: int,
    aggregation: str = "worst_pair",
):
    """Both criteria's precoders on shared channel draws, for structure checks.

    Returns a dict with gains (B, N), b_mse, b_dg, and the per-draw total
    achieved DG of each design.  Uses a single generator (not the chunked
    engine); intended for design-level diagnostics, not error estimation.
    """
    eff, nu2, gaps = _derived_stats(model, sensing, aggregation)
    M = model.num_dims
    N = channel_model.num_subcarriers
    if M != N:
        raise ValueError("paired_design_draws expects one subcarrier per feature")
    rng = np.random.default_rng(seed)
    if channel_model.kind == "rayleigh_unit":
        gains = np.sqrt(rng.standard_exponential((num_draws, N)))
    else:
        gains = np.broadcast_to(channel_model.gains, (num_draws, N)).copy()
    sw2 = channel_model.noise_power
    b_mse, _, _ = waterfill_batch(gains, nu2, eff, sw2, power, "MSE")
    b_dg, _, _ = waterfill_batch(gains, nu2, eff, sw2, power, "DG", gaps)

    def total_dg(b):
        G = gains * b
        return np.sum(G**2 * gaps / (G**2 * eff + sw2), axis=1)

    return {
        "gains": gains,
        "b_mse": b_mse,
        "b_dg": b_dg,
        "dg_mse": total_dg(b_mse),
        "dg_dg": total_dg(b_dg),
        "eff_var": eff,
        "second_moments": nu2,
        "mean_gaps_sq": gaps,
    }
