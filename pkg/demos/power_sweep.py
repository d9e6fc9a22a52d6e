"""End-to-end accuracy versus communication power for both design criteria.

Runs the Monte Carlo sweep on the default model over Rayleigh fading and
prints the per-point comparison: the discrimination-oriented design never
loses total gain to the reconstruction-oriented one, the accuracy advantage
lives at moderate power, and the two coincide once power is plentiful.
"""

import numpy as np

from senselink.model import SensingConfig, synthesize_model
from senselink.sim import ChannelModel, SimConfig, sweep_power


def main():
    model = synthesize_model()
    sensing = SensingConfig(noise_power=0.1, power=1.0)
    grid_db = np.arange(-5.0, 10.5, 3.0)
    grid = tuple(10.0 ** (grid_db / 10.0))
    cfg = SimConfig(
        num_trials=30_000,
        rng_seed=77,
        channel_model=ChannelModel.rayleigh(8, 0.1),
    )
    print(f"sweeping P_c over {grid_db} dB, {cfg.num_trials} trials per cell\n")
    result = sweep_power(model, sensing, "both", grid, cfg)

    by = {("%.6g" % r.value, r.criterion): r for r in result.rows}
    print(f"{'P_c [dB]':>9} {'DG total gain':>14} {'MSE total gain':>15}"
          f" {'acc DG':>8} {'acc MSE':>8} {'gap':>8}")
    for db, p in zip(grid_db, grid):
        rd = by[("%.6g" % p, "DG")]
        rm = by[("%.6g" % p, "MSE")]
        gap = rd.accuracy - rm.accuracy
        print(f"{db:9.1f} {rd.total_dg_mean:14.4f} {rm.total_dg_mean:15.4f}"
              f" {rd.accuracy:8.4f} {rm.accuracy:8.4f} {gap:+8.4f}")
        assert rd.total_dg_mean >= rm.total_dg_mean * (1 - 1e-9)

    print("\ntotal gain under the DG criterion dominates at every point;")
    print("the accuracy gap closes as the designs converge at high power.")
    se = np.sqrt(0.25 / cfg.num_trials)
    print(f"(binomial standard error at these settings is about {se:.4f})")


if __name__ == "__main__":
    main()
