#!/usr/bin/env python3
"""Choosing the injection design: blind the eavesdropper, keep the center.

Two design modes. Perfect mode pins the injection scale to the blinding
manifold (eavesdropper deflection exactly zero) and picks the compression
ratio and injecting fraction that maximize the fusion-center deflection.
Constrained mode relaxes blinding to a leakage budget tau and grid-searches
all four knobs. Artificial-noise variance never helps on the manifold: the
optimizer always drives it to zero, as the closing scan shows.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

from ccdet import (
    InjectionPolicy,
    high_snr_check,
    monotonicity_scan,
    optimize_constrained,
    optimize_perfect,
    write_solution,
)

FLIPS = dict(p10=0.8, p20=0.1, p11=0.1, p21=0.8)
POLICY = InjectionPolicy(fraction=0.3, kappa=0.0, art_variance=0.0, **FLIPS)


def show(solution, label: str) -> None:
    print(f"{label}:")
    print(f"    c = {solution.c_star:.3f}, fraction = {solution.fraction_star:.3f}, "
          f"kappa = {solution.kappa_star:.3f}, "
          f"art variance = {solution.noise_variance_star:.3f}")
    print(f"    d_fc = {solution.d_fc_star:.4f}, d_ev = {solution.d_ev_star:.2e} "
          f"({solution.regime}{', fallback' if solution.fallback else ''})")
    print()


def perfect_mode() -> None:
    mean_norm2, sigma2 = 10.0, 1.0
    print(f"signal strength check: high-snr regime = "
          f"{high_snr_check(mean_norm2, sigma2, POLICY.p_b, POLICY.p_t)} "
          f"(threshold p_b^2/p_t = {POLICY.p_b ** 2 / POLICY.p_t:.3f})")
    solution = optimize_perfect(0.8, 0.2, POLICY, mean_norm2, sigma2)
    show(solution, "perfect secrecy, strong signal (closed form)")

    weak = optimize_perfect(0.8, 0.2, POLICY, 2.0, sigma2)
    show(weak, "perfect secrecy, weak signal (fraction by grid scan)")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "solution.txt"
        write_solution(solution, path)
        print("serialized solution:")
        for line in path.read_text().strip().splitlines():
            print(f"    {line}")
    print()


def constrained_mode() -> None:
    grids = {
        "c": [0.2, 0.5, 0.8],
        "fraction": [0.2, 0.3, 0.5],
        "kappa": [0.0, 0.5, 1.0, 2.0, 2.5, 1.0 / (0.3 * 1.4)],
        "gamma_inv": [0.0, 0.5, 1.0],
    }
    for tau in (0.5, 0.05, 0.0):
        solution = optimize_constrained(tau, grids, POLICY, 10.0, (0.0, 1.0))
        show(solution, f"leakage budget tau = {tau}")


def noise_never_helps() -> None:
    blinded = InjectionPolicy(
        fraction=0.3, kappa=1.0 / (0.3 * 1.4), art_variance=0.0, **FLIPS
    )
    scan = monotonicity_scan(
        "d_fc", "gamma_inv", [0.0, 1.0, 2.0, 5.0, 10.0], blinded, 0.2, 5.0, 11.0
    )
    print("fusion-center deflection as artificial-noise variance grows:")
    values = ", ".join(f"{v:.4f}" for v in scan.values)
    print(f"    {values}")
    print(f"    monotone decreasing: {scan.is_monotone_decreasing}")


def main() -> None:
    perfect_mode()
    constrained_mode()
    noise_never_helps()


if __name__ == "__main__":
    main()
