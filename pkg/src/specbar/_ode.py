"""Vectorized propagation of second-order spectral problems.

Propagates (u, u') for -u'' + (q(x) + c) u = lam * u across intervals on
which q is a single expression.  Constant-coefficient stretches use the
exact 2x2 transfer matrix in the entire functions cos(w d) and sin(w d)/w;
sinusoidal stretches use fixed-step RK4.  All routines are vectorized over
an ndarray of spectral parameters.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .core import ConstExpr, PeriodicTail, PotentialModel

_RESCALE_LIMIT = 1e250


class Segment(NamedTuple):
    a: float
    b: float
    expr: object      # ConstExpr | SinExpr
    xoff: float       # q(x) = expr(x - xoff) on [a, b]


def segments(model: PotentialModel, x_lo: float, x_hi: float) -> list[Segment]:
    """Expression-homogeneous subintervals covering [x_lo, x_hi] in order.

    Gaps not covered by pieces or a periodic tail count as q = 0.
    """
    if not (0.0 <= x_lo < x_hi):
        raise ValueError(f"need 0 <= x_lo < x_hi, got [{x_lo}, {x_hi}]")
    zero = ConstExpr(0.0)
    out: list[Segment] = []
    x = x_lo
    for p in model.pieces:
        if p.x_hi <= x or p.x_lo >= x_hi:
            continue
        a = max(p.x_lo, x)
        b = min(p.x_hi, x_hi)
        if a > x + 1e-15:
            out.append(Segment(x, a, zero, 0.0))
        out.append(Segment(a, b, p.expr, 0.0))
        x = b
    if x >= x_hi - 1e-15:
        return out
    tail = model.tail
    if not isinstance(tail, PeriodicTail):
        out.append(Segment(x, x_hi, zero, 0.0))
        return out
    if x < tail.start:
        a = min(tail.start, x_hi)
        out.append(Segment(x, a, zero, 0.0))
        x = a
    while x < x_hi - 1e-15:
        n = math.floor((x - tail.start) / tail.period + 1e-12)
        cell_end = tail.start + (n + 1) * tail.period
        b = min(cell_end, x_hi)
        out.append(Segment(x, b, tail.expr, n * tail.period))
        x = b
    return out


def _sinc_like(w2: np.ndarray, d: float):
    """cos(w d) and sin(w d)/w for w = sqrt(w2), both entire in w2."""
    w = np.sqrt(w2.astype(complex))
    t = w * d
    small = np.abs(t) < 1e-4
    w_safe = np.where(small, 1.0, w)
    c = np.cos(t)
    s = np.where(small, d * (1.0 - t * t / 6.0 * (1.0 - t * t / 20.0)),
                 np.sin(t) / w_safe)
    return c, s


def _step_const(qc: complex, lam, u, up, d: float):
    """Exact transfer across a constant stretch, substepped so that no
    intermediate magnitude exceeds floating-point range."""
    w2 = lam - qc
    w = np.sqrt(np.asarray(w2, dtype=complex))
    growth = float(np.max(np.abs(w.imag))) * abs(d) if w.size else 0.0
    nsub = max(1, math.ceil(growth / 200.0))
    dd = d / nsub
    c, s = _sinc_like(w2, dd)
    logs = np.zeros(np.shape(lam))
    for _ in range(nsub):
        u, up = c * u + s * up, -w2 * s * u + c * up
        if nsub > 1:
            u, up, logs = _rescale(u, up, logs)
    return u, up, logs


def _step_rk4(q_of_x, x0: float, lam, u, up, d: float, step: float):
    n = max(1, math.ceil(abs(d) / step))
    h = d / n
    x = x0
    logs = np.zeros(np.shape(lam))
    for i in range(n):
        q1 = q_of_x(x)
        q2 = q_of_x(x + 0.5 * h)
        q3 = q_of_x(x + h)
        k1u = up
        k1p = (q1 - lam) * u
        k2u = up + 0.5 * h * k1p
        k2p = (q2 - lam) * (u + 0.5 * h * k1u)
        k3u = up + 0.5 * h * k2p
        k3p = (q2 - lam) * (u + 0.5 * h * k2u)
        k4u = up + h * k3p
        k4p = (q3 - lam) * (u + h * k3u)
        u = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        up = up + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        x += h
        if i % 64 == 63:
            u, up, logs = _rescale(u, up, logs)
    return u, up, logs


def _rescale(u, up, logs):
    mag = np.maximum(np.abs(u), np.abs(up))
    big = mag > _RESCALE_LIMIT
    if np.any(big):
        factor = np.where(big, mag, 1.0)
        u = u / factor
        up = up / factor
        logs = logs + np.log(factor)
    return u, up, logs


def propagate(model: PotentialModel, lam, x_from: float, x_to: float,
              u, up, q_add: complex = 0.0, step: float = 1e-3):
    """Propagate (u, u') of -u'' + (q + q_add) u = lam u from x_from to x_to.

    Works in either direction.  Returns (u, up, logs) where exp(logs) is a
    magnitude factor split off to avoid overflow; the true solution is
    (u, up) * exp(logs).
    """
    lam = np.asarray(lam, dtype=complex)
    u = np.broadcast_to(np.asarray(u, dtype=complex), lam.shape).copy()
    up = np.broadcast_to(np.asarray(up, dtype=complex), lam.shape).copy()
    logs = np.zeros(lam.shape)
    if math.isclose(x_from, x_to, rel_tol=0.0, abs_tol=1e-15):
        return u, up, logs
    forward = x_to > x_from
    segs = segments(model, *(sorted((x_from, x_to))))
    if not forward:
        segs = segs[::-1]
    for seg in segs:
        x0, x1 = (seg.a, seg.b) if forward else (seg.b, seg.a)
        d = x1 - x0
        if isinstance(seg.expr, ConstExpr):
            u, up, dlogs = _step_const(complex(seg.expr.value) + q_add, lam,
                                       u, up, d)
        else:
            expr = seg.expr
            xoff = seg.xoff

            def q_of_x(x, expr=expr, xoff=xoff):
                return complex(expr(x - xoff)) + q_add

            u, up, dlogs = _step_rk4(q_of_x, x0, lam, u, up, d, step)
        logs = logs + dlogs
        u, up, logs = _rescale(u, up, logs)
    return u, up, logs
