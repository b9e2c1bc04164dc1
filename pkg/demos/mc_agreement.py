#!/usr/bin/env python3
"""Cross-check the analytic layers against the Monte Carlo oracle.

Two independent routes to every number: the closed-form/transform side
(Riccati bond prices, Fourier caplet prices) and plain simulation of the
factor with exact Gaussian transitions.  Agreement is scored in standard
errors; |z| <= 3 is the acceptance bar used throughout the test suite.
Deterministic: fixed seeds, counter-based generators.
"""

from __future__ import annotations

import math

from qou_caplets import (
    CapletTransformPricer,
    ContractSpec,
    McConfig,
    QouParams,
    bond_price,
    log_forward_rate_xi,
    mc_bond_price,
    mc_forward_caplet_price,
)

TBAR = 2.0


def report(label: str, exact: float, mean: float, stderr: float) -> None:
    z = (mean - exact) / stderr
    verdict = "PASS" if abs(z) <= 3.0 else "FAIL"
    print(
        f"{label:<28} exact {exact:.8f}   mc {mean:.8f} +/- {stderr:.2e}   "
        f"z {z:+6.2f}   {verdict}"
    )


def main() -> None:
    params = QouParams(
        kappa=0.9, theta=0.25 / 0.9, delta=0.2, q=0.0, y0=math.sqrt(0.08)
    )
    print("Monte Carlo vs analytic, mean-reverting benchmark model\n")

    config = McConfig(n_paths=100_000, n_steps=256, seed=11)
    exact_bond = bond_price(params, 0.0, params.y0, TBAR)
    est = mc_bond_price(params, 0.0, params.y0, TBAR, config)
    report(f"bond B(0, {TBAR})", exact_bond, est.mean, est.stderr)

    config = McConfig(n_paths=100_000, n_steps=256, seed=23)
    for T in (1.0 / 16.0, 1.0 / 8.0):
        spec0 = ContractSpec(t=0.0, T=T, tbar=TBAR, k=0.0)
        x = log_forward_rate_xi(params, spec0, params.y0)
        pricer = CapletTransformPricer(params, 0.0, T, TBAR, params.y0)
        for offset in (-0.05, 0.0, 0.05):
            spec = ContractSpec(t=0.0, T=T, tbar=TBAR, k=x + offset)
            exact = pricer.forward_price(spec.k)
            est = mc_forward_caplet_price(params, spec, params.y0, config)
            report(f"caplet T={T:<7} k-x={offset:+.2f}", exact, est.mean, est.stderr)

    print("\nsame seed, same estimate (bitwise):")
    a = mc_bond_price(params, 0.0, params.y0, TBAR, McConfig(4096, 64, 5))
    b = mc_bond_price(params, 0.0, params.y0, TBAR, McConfig(4096, 64, 5))
    print(f"  {a.mean!r} == {b.mean!r}: {a.mean == b.mean}")


if __name__ == "__main__":
    main()
