"""Grid convergence of the half-space solver on a manufactured solution.

A unit density ρ on the cube [-1/2,1/2]^2 x [1/4,5/4] gives u* = Gρ.  The
measure σ = ρ u*^(-q), averaged over each cell, makes u* the exact
solution of u = G(u^q dσ).  The discrete solution misses u* by a
discretization error that should fall by about 4x per halving of h.

    python demos/manufactured_convergence.py [--levels 3]
"""

import argparse

import numpy as np

from nlpot.kernels import GreenHalfSpace
from nlpot.measures import uniform_box
from nlpot.solver import manufacture_solution, solve_kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=3, help="grids 4^3, 8^3, ... (default 3 levels)")
    ap.add_argument("--q", type=float, default=0.5)
    args = ap.parse_args()

    K = GreenHalfSpace(3)
    prev = None
    print(f"{'cells':>6} {'iters':>6} {'sup rel error':>14} {'ratio':>7}")
    for k in range(args.levels):
        m = 4 * 2**k
        rho = uniform_box([-0.5, -0.5, 0.25], [0.5, 0.5, 1.25], m)
        sigma, ustar = manufacture_solution(K, rho, args.q, rule="average")
        rep, u = solve_kernel(K, sigma, args.q, tol=1e-10)
        err = float(np.max(np.abs(u.values / ustar.values - 1)))
        ratio = "" if prev is None else f"{prev / err:7.2f}"
        print(f"{m:>4}^3 {rep.iterations:>6} {err:>14.3e} {ratio}")
        prev = err


if __name__ == "__main__":
    main()
