"""Tabulate the numerical propagator supremum against the piecewise bound L on a (beta, K) grid."""

import itertools

import numpy as np

from mhd_echo.growth import GrowthFactorQuery, L_analytic, U_sup_numeric, certifying_c_max


def main():
    print(f"{'beta':>6} {'K':>10} {'c':>10} {'U':>10} {'L':>10}")
    for beta, K in itertools.product(np.linspace(0.3, 4.0, 6), np.geomspace(1e-6, 2.0, 6)):
        q = GrowthFactorQuery(float(beta), float(K), min(certifying_c_max(beta), 1e-4))
        print(f"{q.beta:>6.3g} {q.K:>10.3g} {q.c:>10.3g} {U_sup_numeric(q):>10.5g} {L_analytic(q):>10.5g}")


if __name__ == "__main__":
    main()
