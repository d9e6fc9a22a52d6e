"""Closed-form error and fading-average expressions against Monte Carlo.

Walks through the three analytic results the library exposes: the binary
misclassification probability as a function of the discriminant gain, the
multi-class union bound, and the Rayleigh-fading average of the achieved
gain.  Each is printed next to an independent simulation estimate.
"""

import numpy as np

from senselink.analysis import (
    average_dg_closed_form,
    binary_error_probability,
    q_function,
    union_lower_bound,
)


def binary_error_section(rng):
    print("binary hypothesis error vs discriminant gain")
    print(f"{'dg':>8} {'closed form':>14} {'monte carlo':>14} {'rel err':>10}")
    n = 400_000
    for dg in (0.5, 2.0, 4.0, 8.0):
        # complex-circular noise: the real part of the decision statistic
        # carries half the variance, hence the sqrt(dg / 2) argument
        closed = binary_error_probability(dg)
        sep = np.sqrt(dg)
        x = rng.normal(0.0, np.sqrt(0.5), size=n)
        mc = np.mean(x > sep / 2.0)
        print(f"{dg:8.1f} {closed:14.6f} {mc:14.6f} {abs(closed - mc) / closed:10.2%}")
    print()


def union_bound_section():
    print("union bound, L classes sharing the worst pairwise gain")
    print(f"{'L':>4} {'dg_min':>8} {'bound':>12}")
    for num_classes in (2, 3, 4, 6):
        b = union_lower_bound(4.0, num_classes)
        print(f"{num_classes:4d} {4.0:8.1f} {b.value:12.6f}")
    print("at L = 2 the bound reduces to the exact binary expression:",
          f"{union_lower_bound(4.0, 2).value:.6f} =="
          f" {binary_error_probability(4.0):.6f}")
    print()


def fading_average_section(rng):
    print("Rayleigh-fading average of the achieved gain")
    print("exact factor 1 - (1/rho) e^(1/rho) E1(1/rho) vs sample mean of")
    print("dg_max X/(X + 1/rho) with X ~ Exp(1)")
    dg_max = 4.0
    x = rng.standard_exponential(2_000_000)
    print(f"{'rho':>10} {'closed form':>14} {'monte carlo':>14} {'rel err':>10}")
    for rho in (0.01, 0.1, 1.0, 10.0, 100.0):
        closed = average_dg_closed_form(dg_max, rho)
        mc = float(np.mean(dg_max * x / (x + 1.0 / rho)))
        print(f"{rho:10.2f} {closed:14.6f} {mc:14.6f} {abs(closed - mc) / closed:10.2%}")
    print()
    print("asymptotes: rho -> 0 gives rho * dg_max, rho -> inf saturates at dg_max")
    for rho in (1e-4, 1e4):
        closed = average_dg_closed_form(dg_max, rho)
        ref = dg_max * min(rho, 1.0)
        print(f"  rho = {rho:8.0e}: average {closed:12.6g}, limit form {ref:12.6g}")


def main():
    rng = np.random.default_rng(8231)
    binary_error_section(rng)
    union_bound_section()
    fading_average_section(rng)
    print("\nsanity: Q(0) =", q_function(0.0))


if __name__ == "__main__":
    main()
