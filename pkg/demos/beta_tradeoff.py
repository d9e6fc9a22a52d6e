"""Splitting one power budget between sensing and communication.

A fraction beta of the total budget P observes the features (better input
quality), the rest transmits them (better channel quality).  Neither
endpoint works alone: beta = 0 means nothing reaches the receiver, beta = 1
means nothing is sensed.  The sweep locates the interior optimum and shows
how it moves as the channel SNR changes.
"""

import numpy as np

from senselink.model import synthesize_model
from senselink.sim import ChannelModel, SimConfig, sweep_beta


def run(model, total, snr_r, snr_c, trials, seed):
    grid = tuple(np.round(np.arange(0.1, 0.91, 0.1), 10))
    cfg = SimConfig(
        num_trials=trials,
        rng_seed=seed,
        channel_model=ChannelModel.rayleigh(8, total / snr_c),
    )
    return sweep_beta(model, total / snr_r, total, grid, "both", cfg)


def main():
    model = synthesize_model()
    total, snr_r, trials, seed = 8.0, 100.0, 20_000, 19

    summary = []
    for snr_c_db in (0, 10, 20):
        snr_c = 10.0 ** (snr_c_db / 10.0)
        res = run(model, total, snr_r, snr_c, trials, seed)
        print(f"channel SNR {snr_c_db} dB (sensing SNR fixed at 20 dB)")
        print(f"{'beta':>6} {'acc DG':>8} {'acc MSE':>8}")
        acc = {}
        for r in res.rows:
            acc.setdefault(r.value, {})[r.criterion] = r.accuracy
        for b in sorted(acc):
            mark = []
            if b == res.argmax["DG"]:
                mark.append("DG*")
            if b == res.argmax["MSE"]:
                mark.append("MSE*")
            print(f"{b:6.2f} {acc[b]['DG']:8.4f} {acc[b]['MSE']:8.4f}  {' '.join(mark)}")
        a_dg, a_mse = res.argmax["DG"], res.argmax["MSE"]
        summary.append((snr_c_db, a_dg, a_mse, acc[a_dg]["DG"] - acc[a_mse]["MSE"]))
        print()

    print(f"{'SNR_c [dB]':>11} {'argmax DG':>10} {'argmax MSE':>11} {'DG advantage':>13}")
    for snr_c_db, a_dg, a_mse, gap in summary:
        print(f"{snr_c_db:11d} {a_dg:10.2f} {a_mse:11.2f} {gap:+13.4f}")
    print("\nboth endpoints are useless, so the optimum is interior.  A better")
    print("channel needs less of the budget, pushing the optimal split toward")
    print("sensing, and the discrimination-oriented design's advantage at the")
    print("optimum shrinks as the channel stops being the bottleneck.")


if __name__ == "__main__":
    main()
