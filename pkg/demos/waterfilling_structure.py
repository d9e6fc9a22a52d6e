"""Structure of the two water-filling designs across the power range.

Shows how the reconstruction-oriented (MSE) and discrimination-oriented (DG)
power allocations differ on the same channel: which subcarriers each keeps
active as the communication budget shrinks, and how the allocations converge
once the budget is plentiful.  A unit-gain channel isolates the part of the
story driven by the feature statistics; a faded channel then shows the gains
reshuffling the priorities.
"""

import numpy as np

from senselink.model import (
    SensingConfig,
    effective_variances,
    feature_second_moments,
    pairwise_mean_gaps,
    synthesize_model,
)
from senselink.transceiver import (
    ChannelRealization,
    achieved_dg,
    waterfill_dg,
    waterfill_mse,
)


def describe(design, label):
    active = "".join("x" if a else "." for a in design.active)
    print(f"  {label}: active [{active}]  water level {design.water_level:10.4f}")
    with np.printoptions(precision=3, suppress=True):
        print(f"    precoders {design.precoders}")


def compare(channel, nu2, eff, gaps, powers):
    for power in powers:
        print(f"communication power {power:g}")
        d_mse = waterfill_mse(channel, nu2, eff, power)
        d_dg = waterfill_dg(channel, nu2, eff, gaps, power)
        describe(d_mse, "MSE")
        describe(d_dg, "DG ")
        _, t_mse = achieved_dg(d_mse, channel, eff, gaps)
        _, t_dg = achieved_dg(d_dg, channel, eff, gaps)
        print(f"    total gain: MSE design {t_mse:8.4f}, DG design {t_dg:8.4f}"
              f"  (advantage {t_dg - t_mse:+.4f})")
        both = d_mse.active & d_dg.active
        if both.any():
            rel = np.abs(d_mse.precoders[both] - d_dg.precoders[both])
            rel /= d_mse.precoders[both]
            print(f"    max precoder disagreement on shared subcarriers: {rel.max():.1%}")
        print()


def main():
    model = synthesize_model()
    # near-noiseless sensing: the class statistics alone shape the designs
    sensing = SensingConfig(noise_power=1e-9, power=1.0)
    nu2 = feature_second_moments(model, sensing)
    eff = effective_variances(model, sensing)
    gaps = pairwise_mean_gaps(model, mode="worst_pair")

    with np.printoptions(precision=2, suppress=True):
        print("per-dim separation-to-variance ratio:", gaps / eff)
        print("per-dim variance:                    ", eff)
    print()

    print("--- unit-gain channel: feature statistics drive everything ---\n")
    flat = ChannelRealization(gains=np.ones(8), noise_power=0.1)
    compare(flat, nu2, eff, gaps, (0.1, 1.0, 50.0))
    print("starved (P = 0.1): the MSE design spreads onto a high-variance dim")
    print("while the DG design concentrates on the two best separation ratios;")
    print("flush (P = 50): all subcarriers active, allocations agree to ~2%.\n")

    print("--- faded channel: weak gains override the feature ranking ---\n")
    rng = np.random.default_rng(412)
    z = rng.normal(size=8) + 1j * rng.normal(size=8)
    gains = np.abs(z) / np.sqrt(2.0)
    with np.printoptions(precision=3, suppress=True):
        print("channel gains:", gains)
    print()
    compare(ChannelRealization(gains=gains, noise_power=0.1), nu2, eff, gaps, (1.0, 5.0))
    print("deep fades stay off under both criteria no matter how informative")
    print("the dimension is; the criteria only disagree about the marginal dims.")


if __name__ == "__main__":
    main()
