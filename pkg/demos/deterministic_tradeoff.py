#!/usr/bin/env python3
"""Known-signal detection: how compression and cooperation trade off.

Each node sees the same known signal in white noise, keeps only a random
projection of its observation, and ships the compressed vector to a fusion
center. Halving the kept dimension costs performance; adding nodes buys it
back. This script walks the closed forms and spot-checks one operating point
with a fresh-projection Monte Carlo run.
"""

from __future__ import annotations

import math

import numpy as np

from ccdet import (
    RngContract,
    Scenario,
    SignalModel,
    estimate_errors_fresh_phi,
    gen_projection,
    nodes_required,
    pe_deterministic_approx,
    pe_deterministic_bounds,
    pe_deterministic_chernoff,
    pe_deterministic_exact,
    q_function,
)
from ccdet.montecarlo import PHI_STREAM_BASE

AMBIENT_DIM = 100
SNR = 2.0  # signal energy over per-coordinate noise variance (3 dB)
SEED = 2024


def error_table() -> None:
    print(f"closed-form error probability, snr = {SNR} (3 dB)")
    ratios = (0.1, 0.2, 0.5, 1.0)
    print("    nodes  " + "  ".join(f"c={c:>4.1f}" for c in ratios))
    for n in (1, 2, 5, 10, 25):
        row = "  ".join(f"{pe_deterministic_approx(c, n, SNR):.4f}" for c in ratios)
        print(f"    {n:>5}  {row}")
    print()
    print("the same product c*n*snr gives the same error:")
    for c, n in ((0.2, 5), (0.5, 2), (1.0, 1)):
        print(f"    c={c:.1f} n={n}: pe = {pe_deterministic_approx(c, n, SNR):.6f}")
    print()


def budget_examples() -> None:
    print("node budgets for a target error, c = 0.2")
    for delta in (0.1, 0.05, 0.01):
        n = nodes_required(0.2, SNR, delta)
        achieved = pe_deterministic_approx(0.2, n, SNR)
        print(f"    target {delta:.2f}: {n} nodes (achieves {achieved:.4f})")
    print()
    print("bounds around the c=0.2, n=5 point")
    lower, upper = pe_deterministic_bounds(0.2, 5, SNR, 0.1)
    print(f"    embedding bounds (eps 0.1): [{lower:.4f}, {upper:.4f}]")
    print(f"    exponential bound: {pe_deterministic_chernoff(0.2, 5, SNR):.4f}")
    print()


def monte_carlo_spot_check() -> None:
    mean = math.sqrt(SNR / AMBIENT_DIM) * np.ones(AMBIENT_DIM)
    model = SignalModel(
        ambient_dim=AMBIENT_DIM, mean=mean, signal_variance=0.0, noise_variance=1.0
    )
    scenario = Scenario(
        model=model,
        compressed_dim=20,
        num_nodes=5,
        priors=(0.5, 0.5),
        seed=SEED,
        trials=20000,
    )
    target = q_function(0.5 * math.sqrt(0.2 * 5 * SNR))
    result = estimate_errors_fresh_phi(scenario, 20000, 200)
    print("monte carlo spot check at c=0.2, n=5 (fresh projection per batch)")
    print(f"    empirical pe  {result.pe_fc:.4f} +/- {result.pe_fc_ci:.4f}")
    print(f"    closed form   {target:.4f}")

    op = gen_projection(20, AMBIENT_DIM, RngContract(SEED, PHI_STREAM_BASE))
    energy = op.projector_energy(mean)
    print(f"    one fixed projection keeps {energy / SNR:.3f} of the signal energy")
    print(f"    its exact error: {pe_deterministic_exact(energy, 1.0, 5):.4f}")


def main() -> None:
    error_table()
    budget_examples()
    monte_carlo_spot_check()


if __name__ == "__main__":
    main()
