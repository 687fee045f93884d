"""Shared fixtures and independent test-side oracles.

The closed-form characteristic functions and the grid-Newton root hunt are
reimplemented here from scratch (plain numpy) so that package results are
checked against an independent computational path.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from specbar.core import (
    ConstExpr,
    PeriodicTail,
    Piece,
    PotentialModel,
    SinExpr,
)

# Limit-operator eigenvalues of the stacked-barrier example (background
# i*chi_[0,4.7], gamma = 1), frozen from high-precision root finding on the
# secular equation; see tests/test_sturm.py::test_limit_eigenvalues_oracle.
STACKED_LIMIT_EIG_1 = 0.32251153580132051 + 1.90785844318208443j
STACKED_LIMIT_EIG_2 = 1.34711180277728019 + 1.57047346491849670j

# Real part of the embedded resonance of the stacked-barrier background,
# frozen from Newton iteration on the upper-continued secular equation
# (the zero itself sits at 3.244575 - 4.02e-4 i, just below the axis).
STACKED_EMBEDDED_RESONANCE_RE = 3.244575382364


@pytest.fixture(scope="session")
def free_model() -> PotentialModel:
    return PotentialModel()


@pytest.fixture(scope="session")
def stacked_model() -> PotentialModel:
    return PotentialModel(pieces=(Piece(0.0, 4.7, ConstExpr(1j)),))


@pytest.fixture(scope="session")
def sin_model() -> PotentialModel:
    return PotentialModel(
        tail=PeriodicTail(period=2 * math.pi, start=0.0, expr=SinExpr(1.0, 1.0))
    )


@pytest.fixture(scope="session")
def free_periodic_model() -> PotentialModel:
    return PotentialModel(
        tail=PeriodicTail(period=1.0, start=0.0, expr=ConstExpr(0.0))
    )


def oracle_sqrt(z):
    """Independent principal square root: cut on [0, inf), Im >= 0."""
    z = np.asarray(z, dtype=complex)
    w = np.sqrt(z)
    return np.where((w.imag < 0) | ((w.imag == 0) & (w.real < 0)), -w, w)


def oracle_f_free(lam, R, second=False):
    """Closed form for the free background with a unit barrier."""
    s = oracle_sqrt(lam)
    if second:
        s = -s
    w = oracle_sqrt(lam - 1j)
    return 1j * s * np.sin(w * R) - w * np.cos(w * R)


def oracle_f_stacked(lam, R, R0=4.7, second=False):
    """Closed form for the stacked barrier (background i on [0, R0))."""
    s = oracle_sqrt(lam)
    if second:
        s = -s
    wi = oracle_sqrt(lam - 1j)
    w2 = oracle_sqrt(lam - 2j)
    kap = (wi - s) / (wi + s)
    ee = np.exp(-2j * wi * (R - R0))
    return (1j * wi * (ee - kap) * np.sin(w2 * R0)
            - w2 * (ee + kap) * np.cos(w2 * R0))


def grid_newton_roots(f, rect, n=200, dedup=1e-8, keep_tol=1e-10, itmax=80):
    """All zeros of f inside rect from Newton on an n x n grid of starts.

    f must be vectorized; the derivative is a central difference.  Returns
    roots sorted by real then imaginary part, deduplicated at ``dedup``.
    """
    x_lo, x_hi, y_lo, y_hi = rect
    xs = np.linspace(x_lo, x_hi, n)
    ys = np.linspace(y_lo, y_hi, n)
    Z = (xs[None, :] + 1j * ys[:, None]).ravel()
    h = 1e-7
    with np.errstate(all="ignore"):
        for _ in range(itmax):
            fz = f(Z)
            df = (f(Z + h) - f(Z - h)) / (2 * h)
            step = np.where(df != 0, fz / np.where(df == 0, 1, df), 0)
            big = np.abs(step) > 0.5
            step = np.where(big, step / np.where(big, np.abs(step), 1) * 0.5, step)
            Z = Z - step
        res = np.abs(f(Z))
    ok = ((res < keep_tol) & (Z.real > x_lo) & (Z.real < x_hi)
          & (Z.imag > y_lo) & (Z.imag < y_hi))
    roots: list[complex] = []
    for z in Z[ok]:
        if not any(abs(z - r) < dedup for r in roots):
            roots.append(complex(z))
    return sorted(roots, key=lambda z: (z.real, z.imag))
