"""Command-line front end.

Subcommands
-----------
gen-model     synthesize a feature model and write it to JSON
sweep-power   classification error / DG versus communication power (CSV)
sweep-beta    classification error / DG versus the power split beta (CSV)
closed-forms  closed-form curves with Monte Carlo counterparts (CSV)

Sweeps read a flat key = value config file ('#' starts a comment).  Every
power-like key carries an explicit unit suffix, _db or _linear, and exactly
one of the two may appear.  Exactly one sweep axis may be configured.  CSV
outputs start with '# key = value' provenance lines holding the full
resolved configuration and use 12 significant digits, so reruns with equal
configuration are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis import average_dg_closed_form, binary_error_probability, union_lower_bound
from .model import (
    DEFAULT_MODEL_SEED,
    load_model,
    save_model,
    synthesize_model,
)
from .sim import CHUNK_TRIALS, ChannelModel, SimConfig, sweep_beta, sweep_power
from .transceiver import WaterfillError

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "main",
    "cmd_gen_model",
    "cmd_sweep_power",
    "cmd_sweep_beta",
    "cmd_closed_forms",
]

_DEFAULT_TRIALS = 200_000
_DEFAULT_SEED = 12345


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(linear: float) -> float:
    if linear <= 0.0:
        raise ConfigError("cannot express a non-positive power in dB")
    return 10.0 * math.log10(linear)


@dataclass
class ExperimentConfig:
    """Resolved sweep configuration; all powers linear after parsing."""

    command: str
    model_path: str
    channel_noise_power: float
    criterion: str
    trials: int
    seed: int
    subcarriers: int | None
    aggregation: str
    channel_kind: str
    channel_gains: tuple | None
    grid: tuple  # linear P_c values or beta fractions
    grid_db: tuple | None  # dB labels of the power grid, None for beta
    sensing_noise_power: float | None = None
    sensing_power: float | None = None
    total_power: float | None = None
    provenance: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Config file parsing
# ---------------------------------------------------------------------------

def parse_config_file(path: str) -> dict[str, str]:
    """Flat key = value lines; '#' comments; duplicate keys rejected."""
    entries: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(raw.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = body.split("=", 1)
        key = key.strip().lower()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


_KNOWN_KEYS = {
    "model", "channel", "criterion", "trials", "seed", "aggregation", "subcarriers",
    "channel_noise_power_db", "channel_noise_power_linear",
    "sensing_noise_power_db", "sensing_noise_power_linear",
    "sensing_power_db", "sensing_power_linear",
    "total_power_db", "total_power_linear",
    "snr_c_db", "snr_c_linear", "snr_r_db", "snr_r_linear",
    "pc_grid_db", "pc_grid_linear", "beta_grid",
}


def _float(entries, key):
    try:
        return float(entries[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: not a number: {entries[key]!r}") from exc


def _power_pair(entries, base):
    """Return (linear_value, source_key) for a unit-suffixed power key."""
    db_key, lin_key = f"{base}_db", f"{base}_linear"
    has_db, has_lin = db_key in entries, lin_key in entries
    if has_db and has_lin:
        raise ConfigError(f"both {db_key} and {lin_key} given; pick one")
    if has_db:
        return db_to_linear(_float(entries, db_key)), db_key
    if has_lin:
        val = _float(entries, lin_key)
        if val <= 0.0:
            raise ConfigError(f"{lin_key} must be positive")
        return val, lin_key
    return None, None


def _parse_grid_text(text: str, key: str) -> list[float]:
    """'start:stop:step' (inclusive stop) or comma-separated values."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError("range needs start:stop:step")
            start, stop, step = parts
            if step <= 0.0:
                raise ValueError("step must be positive")
            count = (stop - start) / step
            n = round(count)
            if n < 0 or abs(count - n) > 1e-9:
                raise ValueError("step does not divide the range")
            return [start + i * step for i in range(n + 1)]
        return [float(p) for p in text.split(",") if p.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: bad grid {text!r}: {exc}") from exc


def _require_increasing(values, key):
    if len(values) < 1:
        raise ConfigError(f"key {key!r}: empty grid")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"key {key!r}: grid must be strictly increasing")


def _parse_channel(entries):
    text = entries.get("channel", "rayleigh")
    if text == "rayleigh":
        return "rayleigh_unit", None
    if text.startswith("fixed:"):
        gains = tuple(float(p) for p in text[len("fixed:"):].split(","))
        if any(g < 0 for g in gains):
            raise ConfigError("fixed channel gains must be nonnegative")
        return "fixed_gains", gains
    raise ConfigError(f"key 'channel': expected 'rayleigh' or 'fixed:g1,g2,...', got {text!r}")


def load_experiment(config_path: str, command: str, overrides: dict) -> ExperimentConfig:
    entries = parse_config_file(config_path)
    unknown = set(entries) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    has_pc = "pc_grid_db" in entries or "pc_grid_linear" in entries
    has_beta = "beta_grid" in entries
    if has_pc and has_beta:
        raise ConfigError("both a power grid and a beta grid configured; exactly one sweep axis")
    if command == "sweep-power" and not has_pc:
        raise ConfigError("sweep-power needs pc_grid_db or pc_grid_linear")
    if command == "sweep-beta" and not has_beta:
        raise ConfigError("sweep-beta needs beta_grid")

    if "model" not in entries:
        raise ConfigError("config must name a model file (key 'model')")
    model_path = entries["model"]
    if not os.path.isabs(model_path):
        model_path = os.path.normpath(os.path.join(os.path.dirname(os.path.abspath(config_path)), model_path))

    criterion = overrides.get("criterion") or entries.get("criterion", "both")
    if criterion not in ("MSE", "DG", "both"):
        raise ConfigError(f"criterion must be MSE, DG or both, got {criterion!r}")
    trials = overrides.get("trials")
    if trials is None:
        trials = int(_float(entries, "trials")) if "trials" in entries else _DEFAULT_TRIALS
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    seed = overrides.get("seed")
    if seed is None:
        seed = int(_float(entries, "seed")) if "seed" in entries else _DEFAULT_SEED
    if not 0 <= seed < 2**63:
        raise ConfigError("seed must be a nonnegative 63-bit integer")
    aggregation = entries.get("aggregation", "worst_pair")
    if aggregation not in ("worst_pair", "average_pairs"):
        raise ConfigError(f"aggregation must be worst_pair or average_pairs, got {aggregation!r}")
    subcarriers = int(_float(entries, "subcarriers")) if "subcarriers" in entries else None
    channel_kind, channel_gains = _parse_channel(entries)

    total_power, total_src = _power_pair(entries, "total_power")

    # channel noise: direct power or SNR relative to the total budget
    chan_noise, chan_src = _power_pair(entries, "channel_noise_power")
    snr_c, snr_c_src = _power_pair(entries, "snr_c")
    if chan_noise is not None and snr_c is not None:
        raise ConfigError("give channel_noise_power_* or snr_c_*, not both")
    if snr_c is not None:
        if total_power is None:
            raise ConfigError("snr_c_* needs total_power_* to define the noise floor")
        chan_noise = total_power / snr_c
    if chan_noise is None:
        raise ConfigError("channel noise level missing (channel_noise_power_* or snr_c_*)")

    sens_noise, sens_src = _power_pair(entries, "sensing_noise_power")
    snr_r, snr_r_src = _power_pair(entries, "snr_r")
    if sens_noise is not None and snr_r is not None:
        raise ConfigError("give sensing_noise_power_* or snr_r_*, not both")
    if snr_r is not None:
        if total_power is None:
            raise ConfigError("snr_r_* needs total_power_* to define the noise floor")
        sens_noise = total_power / snr_r

    sensing_power, _ = _power_pair(entries, "sensing_power")

    if command == "sweep-power":
        if sens_noise is None or sensing_power is None:
            raise ConfigError("sweep-power needs sensing_noise_power_* and sensing_power_*")
        if "pc_grid_db" in entries:
            grid_db = _parse_grid_text(entries["pc_grid_db"], "pc_grid_db")
            _require_increasing(grid_db, "pc_grid_db")
            grid = [db_to_linear(v) for v in grid_db]
        else:
            grid = _parse_grid_text(entries["pc_grid_linear"], "pc_grid_linear")
            _require_increasing(grid, "pc_grid_linear")
            if any(v <= 0 for v in grid):
                raise ConfigError("pc_grid_linear values must be positive")
            grid_db = [linear_to_db(v) for v in grid]
    elif command == "sweep-beta":
        if total_power is None:
            raise ConfigError("sweep-beta needs total_power_*")
        if sens_noise is None:
            raise ConfigError("sweep-beta needs sensing_noise_power_* or snr_r_*")
        grid = _parse_grid_text(entries["beta_grid"], "beta_grid")
        _require_increasing(grid, "beta_grid")
        if any(v < 0.0 or v > 1.0 for v in grid):
            raise ConfigError("beta values must lie in [0, 1]")
        grid_db = None
    else:
        raise ConfigError(f"unknown sweep command {command!r}")

    provenance = dict(sorted(entries.items()))
    provenance["resolved_channel_noise_power_linear"] = chan_noise
    if sens_noise is not None:
        provenance["resolved_sensing_noise_power_linear"] = sens_noise
    if sensing_power is not None:
        provenance["resolved_sensing_power_linear"] = sensing_power
    if total_power is not None:
        provenance["resolved_total_power_linear"] = total_power
    provenance["resolved_criterion"] = criterion
    provenance["resolved_trials"] = trials
    provenance["resolved_seed"] = seed
    provenance["resolved_aggregation"] = aggregation
    provenance["resolved_chunk_trials"] = CHUNK_TRIALS

    return ExperimentConfig(
        command=command,
        model_path=model_path,
        channel_noise_power=chan_noise,
        criterion=criterion,
        trials=trials,
        seed=seed,
        subcarriers=subcarriers,
        aggregation=aggregation,
        channel_kind=channel_kind,
        channel_gains=channel_gains,
        grid=tuple(grid),
        grid_db=tuple(grid_db) if grid_db is not None else None,
        sensing_noise_power=sens_noise,
        sensing_power=sensing_power,
        total_power=total_power,
        provenance=provenance,
    )


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return format(v, ".12g")


def write_csv(path, command: str, provenance: dict, header, rows) -> None:
    lines = [f"# senselink {command} v{__version__}"]
    for key in sorted(provenance):
        lines.append(f"# {key} = {_fmt(provenance[key])}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _channel_model(cfg: ExperimentConfig, num_dims: int) -> ChannelModel:
    if cfg.channel_kind == "fixed_gains":
        cm = ChannelModel.fixed(np.array(cfg.channel_gains), cfg.channel_noise_power)
        n = cm.num_subcarriers
    else:
        n = cfg.subcarriers if cfg.subcarriers is not None else num_dims
        cm = ChannelModel.rayleigh(n, cfg.channel_noise_power)
        n = cm.num_subcarriers
    if num_dims > n:
        raise ConfigError(f"model has {num_dims} dims but only {n} subcarriers configured")
    return cm


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen_model(args) -> int:
    model = synthesize_model(
        num_classes=args.classes,
        num_dims=args.dims,
        seed=args.seed,
        total_dg=args.total_dg,
        gap_jitter=args.gap_jitter,
        var_range=(args.var_min, args.var_max),
    )
    save_model(model, args.out)
    print(f"wrote model: {args.classes} classes x {args.dims} dims -> {args.out}")
    return 0


def cmd_sweep_power(args) -> int:
    cfg = load_experiment(args.config, "sweep-power", _overrides(args))
    model = load_model(cfg.model_path)
    from .model import SensingConfig  # local import keeps cli deps flat

    sensing = SensingConfig(noise_power=cfg.sensing_noise_power, power=cfg.sensing_power)
    sim = SimConfig(
        num_trials=cfg.trials,
        rng_seed=cfg.seed,
        channel_model=_channel_model(cfg, model.num_dims),
        aggregation=cfg.aggregation,
    )
    result = sweep_power(model, sensing, cfg.criterion, cfg.grid, sim)
    rows = []
    per_point = len(result.rows) // len(cfg.grid)
    for i, row in enumerate(result.rows):
        db = cfg.grid_db[i // per_point]
        rows.append(
            [db, row.criterion, row.total_dg_mean, row.error_bound, row.accuracy, row.stderr]
        )
    header = ["p_c_db", "criterion", "total_dg_mean", "error_bound", "accuracy", "stderr"]
    write_csv(args.out, "sweep-power", cfg.provenance, header, rows)
    print(f"wrote {len(rows)} rows -> {args.out}")
    return 0


def cmd_sweep_beta(args) -> int:
    cfg = load_experiment(args.config, "sweep-beta", _overrides(args))
    model = load_model(cfg.model_path)
    sim = SimConfig(
        num_trials=cfg.trials,
        rng_seed=cfg.seed,
        channel_model=_channel_model(cfg, model.num_dims),
        aggregation=cfg.aggregation,
    )
    result = sweep_beta(
        model, cfg.sensing_noise_power, cfg.total_power, cfg.grid, cfg.criterion, sim
    )
    header = ["row", "beta", "criterion", "total_dg_mean", "accuracy", "stderr", "valid"]
    rows = []
    for r in result.rows:
        rows.append(
            ["data", r.value, r.criterion, r.total_dg_mean, r.accuracy, r.stderr, int(r.valid)]
        )
    for crit in sorted(result.argmax or {}):
        beta = result.argmax[crit]
        match = next(
            r for r in result.rows if r.criterion == crit and r.value == beta and r.valid
        )
        rows.append(
            ["argmax", beta, crit, match.total_dg_mean, match.accuracy, match.stderr, 1]
        )
    write_csv(args.out, "sweep-beta", cfg.provenance, header, rows)
    print(f"wrote {len(rows)} rows -> {args.out}")
    return 0


def _mc_average_dg(dg_max, rho, trials, seed) -> float:
    total = 0.0
    done = 0
    chunk = 0
    while done < trials:
        n = min(CHUNK_TRIALS * 64, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0, chunk]))
        e = rng.standard_exponential(n)
        total += float(np.sum(dg_max * e * rho / (e * rho + 1.0)))
        done += n
        chunk += 1
    return total / trials


def _mc_line_model_error(num_classes, dg, trials, seed, stream) -> float:
    """Error of ML on L equispaced complex-Gaussian classes, adjacent DG = dg."""
    mu = np.arange(num_classes) * math.sqrt(dg)
    errors = 0
    done = 0
    chunk = 0
    while done < trials:
        n = min(CHUNK_TRIALS * 8, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), stream, chunk]))
        labels = rng.integers(0, num_classes, n)
        obs = mu[labels] + math.sqrt(0.5) * rng.standard_normal(n)
        # imag part is class-independent; the real part decides
        dist = (obs[:, None] - mu[None, :]) ** 2
        pred = np.argmin(dist, axis=1)
        errors += int(np.count_nonzero(pred != labels))
        done += n
        chunk += 1
    return errors / trials


def _mc_union_expression(num_classes, dg, trials, seed, stream) -> float:
    """Monte Carlo integration of (L - 1) Q(sqrt(dg / 2)) by tail sampling."""
    x = math.sqrt(dg / 2.0)
    hits = 0
    done = 0
    chunk = 0
    while done < trials:
        n = min(CHUNK_TRIALS * 8, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), stream, chunk]))
        hits += int(np.count_nonzero(rng.standard_normal(n) > x))
        done += n
        chunk += 1
    return (num_classes - 1) * hits / trials


def cmd_closed_forms(args) -> int:
    rho_grid = _parse_grid_text(args.rho_grid, "--rho-grid")
    dg_grid = _parse_grid_text(args.dg_grid, "--dg-grid")
    _require_increasing(rho_grid, "--rho-grid")
    _require_increasing(dg_grid, "--dg-grid")
    if any(r <= 0 for r in rho_grid):
        raise ConfigError("--rho-grid values must be positive")
    if any(d < 0 for d in dg_grid):
        raise ConfigError("--dg-grid values must be nonnegative")
    if args.classes < 2:
        raise ConfigError("--classes must be >= 2")
    if args.dg_max <= 0:
        raise ConfigError("--dg-max must be positive")
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")

    rows = []
    for rho in rho_grid:
        cf = average_dg_closed_form(args.dg_max, rho)
        mc = _mc_average_dg(args.dg_max, rho, args.trials, args.seed)
        rel = abs(cf - mc) / cf if cf > 0 else math.nan
        rows.append(["avg_dg", rho, cf, mc, rel, 1])
    for dg in dg_grid:
        cf = binary_error_probability(dg)
        mc = _mc_line_model_error(2, dg, args.trials, args.seed, stream=1)
        rel = abs(cf - mc) / cf if cf > 0 else math.nan
        rows.append(["binary_error", dg, cf, mc, rel, 1])
    for dg in dg_grid:
        bound = union_lower_bound(dg, args.classes)
        mc = _mc_union_expression(args.classes, dg, args.trials, args.seed, stream=2)
        rel = abs(bound.value - mc) / bound.value if bound.value > 0 else math.nan
        rows.append(["union_bound", dg, bound.value, mc, rel, int(bound.valid)])

    provenance = {
        "rho_grid": args.rho_grid,
        "dg_grid": args.dg_grid,
        "dg_max": args.dg_max,
        "classes": args.classes,
        "trials": args.trials,
        "seed": args.seed,
    }
    header = ["kind", "x", "closed_form", "monte_carlo", "rel_err", "valid"]
    write_csv(args.out, "closed-forms", provenance, header, rows)
    print(f"wrote {len(rows)} rows -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _overrides(args) -> dict:
    return {
        "seed": getattr(args, "seed", None),
        "trials": getattr(args, "trials", None),
        "criterion": getattr(args, "criterion", None),
    }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="senselink",
        description="Inference-oriented sensing-and-communication link designer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-model", help="synthesize a feature model JSON")
    g.add_argument("--classes", type=int, default=4)
    g.add_argument("--dims", type=int, default=8)
    g.add_argument("--seed", type=int, default=DEFAULT_MODEL_SEED)
    g.add_argument("--total-dg", type=float, default=16.0)
    g.add_argument("--gap-jitter", type=float, default=1.08)
    g.add_argument("--var-min", type=float, default=0.05)
    g.add_argument("--var-max", type=float, default=0.5)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_model)

    for name, func in (("sweep-power", cmd_sweep_power), ("sweep-beta", cmd_sweep_beta)):
        p = sub.add_parser(name, help=f"run {name} and write CSV")
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--trials", type=int, default=None, help="override config trials")
        p.add_argument("--criterion", choices=("MSE", "DG", "both"), default=None)
        p.set_defaults(func=func)

    c = sub.add_parser("closed-forms", help="closed forms vs Monte Carlo, CSV")
    c.add_argument("--rho-grid", default="0.01,0.1,1,10,100")
    c.add_argument("--dg-grid", default="0,1,2,4,8,16")
    c.add_argument("--dg-max", type=float, default=4.0)
    c.add_argument("--classes", type=int, default=4)
    c.add_argument("--trials", type=int, default=1_000_000)
    c.add_argument("--seed", type=int, default=_DEFAULT_SEED)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_closed_forms)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (WaterfillError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
