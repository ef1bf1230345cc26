"""Sweep xi, fit log A = C sqrt(xi) + b and compare C with the chain heuristic.

    python3 scripts/gevrey_scaling.py --n 6 --workers 6
"""

import argparse

from mhd_echo.analysis import chain_prediction
from mhd_echo.core import PhysParams
from mhd_echo.sweep import SweepSpec, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--xi-min", type=float, default=2e7)
    ap.add_argument("--xi-max", type=float, default=2e8)
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    params = PhysParams(9.0, 64.8, 1e-4)
    spec = SweepSpec(SweepSpec.log_grid(args.xi_min, args.xi_max, args.n), params, worker_count=args.workers)
    result = run_sweep(spec)
    for row in result.rows:
        status = row.error or f"k {row.k_start}->{row.k_end}, A = {row.terminal_amplification:.6g}"
        print(f"xi = {row.xi:.4g}: {status}")
    if result.fit is None:
        print("no fit:", result.fit_error)
        return
    fit = result.fit
    print(f"log A = {fit.slope:.5g} sqrt(xi) + {fit.intercept:.4g}   (R^2 = {fit.r_squared:.4f})")
    pred = chain_prediction(params, args.xi_max, 1.0)
    print(f"heuristic at xi_max with C' = 1: k_opt = {pred.k_opt}, log prod = {pred.log_product:.4g}")


if __name__ == "__main__":
    main()
