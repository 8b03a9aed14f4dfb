#!/usr/bin/env python3
"""Smoke test for the pysylkit extension module.

Build and stage the module first:

    cargo build --release -p pysylkit --features extension-module
    cp target/release/libpysylkit.so python/pysylkit.so

then run `python3 python/smoke_test.py`.
"""
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pysylkit  # noqa: E402


def approx(a, b, tol):
    return abs(a - b) <= tol


def main():
    # generators
    a = pysylkit.SparseMatrix.convdiff_2d(20, 0.1, "example61_A")
    b = pysylkit.SparseMatrix.convdiff_2d(20, 0.1, "example61_B")
    assert a.shape() == (400, 400)
    assert a.nnz() == 5 * 400 - 4 * 20
    t = pysylkit.SparseMatrix.toeplitz(30)
    assert t.shape() == (30, 30)

    # matvec against an identity-ish check
    y = t.matvec([1.0] * 30)
    assert len(y) == 30

    # sketched solve end to end
    rep = pysylkit.solve_sylvester(
        a, b, engine="sketched", tol=1e-6, maxit=150, k=8, p=5, s=200,
        sketch="gaussian", seed=3, true_residual=True,
    )
    assert rep.converged, f"solver did not converge: rho={rep.final_rho}"
    assert rep.true_residual is not None and rep.true_residual < 1e-4, rep.true_residual
    n, l, x1 = rep.x1()
    assert n == 400 and l == rep.rank and len(x1) == n * l
    assert rep.mem_long_vectors < 2 * (8 + 1) + 2 * rep.rank + 8 + 1
    assert len(rep.history()) >= 1

    # engines agree on the solution scale
    rep_full = pysylkit.solve_sylvester(
        a, b, engine="full", tol=1e-6, maxit=150, p=5, true_residual=True,
    )
    assert rep_full.converged
    assert rep_full.true_residual < 2e-6

    # dense projected solver: H = [-1], G = [-1], C = [4] -> Y = [-2]
    yval = pysylkit.solve_sylvester_dense([-1.0], 1, [-1.0], 1, [4.0])
    assert approx(yval[0], -2.0, 1e-14)

    # bound constants
    assert approx(2.0 * pysylkit.eta_eps(1.0 / math.sqrt(2.0)), 19.45, 0.01)
    assert approx(2.0 * pysylkit.eta_eps(0.0), 8.0, 1e-12)
    bound = pysylkit.ellipse_bound(10, -0.5, 3.0, 2.0, 1.0, 0.3)
    assert bound > 0.0
    assert pysylkit.ellipse_bound(20, -0.5, 3.0, 2.0, 1.0, 0.3) < bound

    print("pysylkit smoke test: all checks passed")


if __name__ == "__main__":
    main()
