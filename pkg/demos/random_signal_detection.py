#!/usr/bin/env python3
"""Gaussian-signal detection from compressed observations.

When the signal itself is random, the fused test statistic is a quadratic
form whose scaled law is noncentral chi-squared under each hypothesis. This
script prints the thresholds and laws for one scenario, compares the exact
error probability with its large-dimension approximation across compression
ratios, and closes with a Monte Carlo run of the exact test.
"""

from __future__ import annotations

import numpy as np

from ccdet import (
    RngContract,
    Scenario,
    SignalModel,
    estimate_errors,
    gen_projection,
    pe_random_approx,
    pe_random_exact,
    random_thresholds,
    sample_transformed_statistics,
    test_stat_distribution,
)
from ccdet.montecarlo import PHI_STREAM_BASE

AMBIENT_DIM = 100
SIGNAL_VARIANCE = 1.0
NOISE_VARIANCE = 20.0
SEED = 7


def law_and_thresholds() -> None:
    model = SignalModel(
        ambient_dim=AMBIENT_DIM,
        mean=np.zeros(AMBIENT_DIM),
        signal_variance=SIGNAL_VARIANCE,
        noise_variance=NOISE_VARIANCE,
    )
    m, n = 50, 10
    op = gen_projection(m, AMBIENT_DIM, RngContract(SEED, PHI_STREAM_BASE))
    energy = op.projector_energy(model.mean)
    spec_h0, spec_h1 = test_stat_distribution(model, m, n, energy)
    print(f"fused statistic laws at m={m}, n={n} (zero mean)")
    print(f"    H0: {spec_h0.dof} dof, scale {spec_h0.scale:.1f}, "
          f"mean {spec_h0.mean:.1f}")
    print(f"    H1: {spec_h1.dof} dof, scale {spec_h1.scale:.1f}, "
          f"mean {spec_h1.mean:.1f}")
    raw, transformed = random_thresholds(model, m, n, energy, (0.5, 0.5))
    print(f"    thresholds: raw {raw:.1f}, transformed {transformed:.1f}")

    rng = RngContract(SEED, 1).generator()
    scenario = Scenario(
        model=model, compressed_dim=m, num_nodes=n,
        priors=(0.5, 0.5), seed=SEED, trials=4000,
    )
    samples = sample_transformed_statistics(scenario, op, "H0", 4000, rng)
    print(f"    simulated H0 mean {samples.mean():.1f} "
          f"(law says {spec_h0.mean:.1f})")
    print()


def exact_versus_approximation() -> None:
    model = SignalModel(
        ambient_dim=AMBIENT_DIM,
        mean=np.zeros(AMBIENT_DIM),
        signal_variance=SIGNAL_VARIANCE,
        noise_variance=NOISE_VARIANCE,
    )
    n = 20
    print(f"error probability over the compression ratio, n={n}")
    print("        c     exact    approx")
    for c in (0.1, 0.25, 0.5, 0.75, 1.0):
        m = int(round(c * AMBIENT_DIM))
        exact = pe_random_exact(model, m, n, 0.0, (0.5, 0.5))
        approx = pe_random_approx(
            c, n, AMBIENT_DIM, 0.0, SIGNAL_VARIANCE, NOISE_VARIANCE
        )
        print(f"    {c:>5.2f}   {exact.pe:.4f}   {approx.pe:.4f}")
    print()


def monte_carlo_run() -> None:
    model = SignalModel(
        ambient_dim=AMBIENT_DIM,
        mean=np.zeros(AMBIENT_DIM),
        signal_variance=SIGNAL_VARIANCE,
        noise_variance=NOISE_VARIANCE,
    )
    m, n = 50, 10
    scenario = Scenario(
        model=model, compressed_dim=m, num_nodes=n,
        priors=(0.5, 0.5), seed=SEED, trials=10000,
    )
    op = gen_projection(m, AMBIENT_DIM, RngContract(SEED, PHI_STREAM_BASE))
    result = estimate_errors(scenario, op, 10000)
    exact = pe_random_exact(model, m, n, 0.0, (0.5, 0.5))
    print(f"monte carlo, exact test, c=0.5, n={n}")
    print(f"    empirical pe  {result.pe_fc:.4f} +/- {result.pe_fc_ci:.4f}")
    print(f"    closed form   {exact.pe:.4f}")
    print(f"    false alarm {result.pf_fc:.4f} vs {exact.pf:.4f}, "
          f"detection {result.pd_fc:.4f} vs {exact.pd:.4f}")


def main() -> None:
    law_and_thresholds()
    exact_versus_approximation()
    monte_carlo_run()


if __name__ == "__main__":
    main()
