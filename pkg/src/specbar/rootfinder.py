"""Locate all zeros of an analytic function inside a rectangle.

The zero count inside a rectangle is obtained from the argument principle:
(1/2*pi*i) times the contour integral of f'/f equals the number of zeros
counted with multiplicity.  Rectangles are subdivided recursively until each
holds at most one zero, which is then polished by damped Newton iteration.
Clusters that cannot be separated are reported either as a single multiple
zero (when a winding check on a small surrounding box confirms the
multiplicity) or as an error.

Function handles must evaluate vectorized over ndarrays of complex points;
the contour quadrature exploits this heavily.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Optional, Protocol

import numpy as np

from .core import Rectangle, SpecbarError, DomainError

__all__ = [
    "AnalyticFunctionHandle",
    "Root",
    "RootSet",
    "ExclusionRegion",
    "HorizontalRay",
    "HorizontalSegment",
    "BoundaryZeroError",
    "QuadratureError",
    "ClusterUnresolvedError",
    "winding_number",
    "find_zeros",
]

_BOUNDARY_REL = 1e-12        # |f| below this fraction of the edge max flags a boundary zero
_MAX_EDGE_POINTS = 1 << 16   # cap on trapezoid refinement per edge
_INFLATE_ATTEMPTS = 5


class BoundaryZeroError(SpecbarError):
    """|f| is suspiciously small on the rectangle boundary."""

    def __init__(self, rect: Rectangle, message: str = ""):
        super().__init__(message or f"suspected zero on the boundary of {rect}")
        self.rect = rect


class QuadratureError(SpecbarError):
    """The contour integral failed to stabilize or is far from an integer."""


class ClusterUnresolvedError(SpecbarError):
    """A multi-zero cluster could not be separated before max_depth."""

    def __init__(self, rect: Rectangle, count: int):
        super().__init__(
            f"cluster of {count} zeros unresolved at maximum depth in {rect}"
        )
        self.rect = rect
        self.count = count


class ExclusionRegion(Protocol):
    """A closed region the search must keep away from."""

    def clearance(self, rect: Rectangle) -> float:
        """Distance from the rectangle to the region (<= 0 means contact)."""
        ...


def _interval_dist(lo: float, hi: float, x: float) -> float:
    if x < lo:
        return lo - x
    if x > hi:
        return x - hi
    return 0.0


@dataclass(frozen=True)
class HorizontalRay:
    """The ray {x + i*y : x >= x_start} inflated by pad."""

    x_start: float
    y: float
    pad: float = 0.0

    def clearance(self, rect: Rectangle) -> float:
        dy = _interval_dist(rect.y_lo, rect.y_hi, self.y)
        dx = 0.0 if rect.x_hi >= self.x_start else self.x_start - rect.x_hi
        return math.hypot(dx, dy) - self.pad


@dataclass(frozen=True)
class HorizontalSegment:
    """The segment {x + i*y : x0 <= x <= x1} inflated by pad."""

    x0: float
    x1: float
    y: float
    pad: float = 0.0

    def clearance(self, rect: Rectangle) -> float:
        dy = _interval_dist(rect.y_lo, rect.y_hi, self.y)
        if rect.x_hi < self.x0:
            dx = self.x0 - rect.x_hi
        elif rect.x_lo > self.x1:
            dx = rect.x_lo - self.x1
        else:
            dx = 0.0
        return math.hypot(dx, dy) - self.pad


@dataclass(frozen=True)
class AnalyticFunctionHandle:
    """Evaluatable analytic function with optional derivative and exclusions.

    ``eval`` must accept an ndarray of complex points and return an ndarray
    of values; ``eval_deriv``, when given, has the same contract.  Without a
    derivative a central difference with a step adapted to the local scale
    is used.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    eval_deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    exclusions: tuple[ExclusionRegion, ...] = ()

    def __call__(self, z):
        scalar = np.isscalar(z) or getattr(z, "ndim", 0) == 0
        out = self.eval(np.atleast_1d(np.asarray(z, dtype=complex)))
        return complex(out[0]) if scalar else out

    def deriv(self, z, scale: float = 1.0):
        scalar = np.isscalar(z) or getattr(z, "ndim", 0) == 0
        arr = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.eval_deriv is not None:
            out = np.asarray(self.eval_deriv(arr))
        else:
            h = max(1e-9, 1e-6 * scale)
            out = (self.eval(arr + h) - self.eval(arr - h)) / (2.0 * h)
        return complex(out[0]) if scalar else out

    def check_clearance(self, rect: Rectangle) -> None:
        for region in self.exclusions:
            if region.clearance(rect) <= 0.0:
                raise DomainError(
                    f"search rectangle {rect} intersects an excluded region of the handle"
                )


@dataclass(frozen=True)
class Root:
    location: complex
    multiplicity: int
    residual: float


@dataclass(frozen=True)
class RootSet:
    roots: tuple[Root, ...] = ()

    @property
    def total_count(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    @property
    def locations(self) -> list[complex]:
        return [r.location for r in self.roots]

    def nearest(self, target: complex) -> Optional[Root]:
        if not self.roots:
            return None
        return min(self.roots, key=lambda r: abs(r.location - target))


# ---------------------------------------------------------------------------
# Contour integration
# ---------------------------------------------------------------------------

def _logderiv(f: AnalyticFunctionHandle, z: np.ndarray, fz: np.ndarray, scale: float):
    """f'/f at the points z, reusing the already computed values fz."""
    if f.eval_deriv is not None:
        dfz = np.asarray(f.eval_deriv(z))
    else:
        h = max(1e-12, 1e-5 * scale)
        dfz = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h)
    return dfz / fz


def _edge_integrals(f: AnalyticFunctionHandle, za: complex, zb: complex,
                    quad_tol: float, rect: Rectangle):
    """Integrals of f'/f and z f'/f along the segment za -> zb.

    Trapezoid sums with interval doubling and one Richardson extrapolation
    step; converged when two successive extrapolants agree to quad_tol.
    Raises BoundaryZeroError when |f| dips below the boundary-zero threshold
    relative to the edge maximum.
    """
    dz = zb - za
    scale = abs(dz)

    def sample(ts):
        z = za + ts * dz
        fz = np.asarray(f.eval(z))
        fabs = np.abs(fz)
        if not np.all(np.isfinite(fabs)):
            raise QuadratureError(
                f"function not finite on contour edge {za} -> {zb}"
            )
        if fabs.size and fabs.min() <= _BOUNDARY_REL * max(fabs.max(), 1e-300):
            raise BoundaryZeroError(rect)
        g = _logderiv(f, z, fz, scale)
        return g, z * g

    m = 32
    ts = np.linspace(0.0, 1.0, m + 1)
    g, zg = sample(ts)
    w = np.ones(m + 1)
    w[0] = w[-1] = 0.5
    t0 = (w @ g) / m
    t1 = (w @ zg) / m
    r0_prev = r1_prev = None
    while m < _MAX_EDGE_POINTS:
        t0_prev, t1_prev = t0, t1
        m *= 2
        ts_new = (np.arange(m // 2) * 2 + 1) / m
        g_new, zg_new = sample(ts_new)
        t0 = 0.5 * t0 + g_new.sum() / m
        t1 = 0.5 * t1 + zg_new.sum() / m
        # Richardson extrapolation of the doubled trapezoid sums
        r0 = t0 + (t0 - t0_prev) / 3.0
        r1 = t1 + (t1 - t1_prev) / 3.0
        if r0_prev is not None:
            # Tolerances on the dz-integral scale, relative to the edge
            # contribution once it exceeds O(1).
            tol0 = quad_tol * max(1.0, abs(r0) * scale)
            tol1 = quad_tol * max(1.0, abs(r1) * scale, abs(za), abs(zb))
            if abs(r0 - r0_prev) * scale < tol0 and abs(r1 - r1_prev) * scale < tol1:
                return r0 * dz, r1 * dz
        r0_prev, r1_prev = r0, r1
    raise QuadratureError(
        f"contour quadrature did not stabilize on edge {za} -> {zb}"
    )


def _contour_counts(f: AnalyticFunctionHandle, rect: Rectangle, quad_tol: float):
    """Zero count and first moment from the boundary contour of rect.

    Returns (count, moment_sum) where moment_sum is the sum of zero
    locations weighted by multiplicity.
    """
    corners = rect.corners
    i0 = 0.0 + 0.0j
    i1 = 0.0 + 0.0j
    for a, b in zip(corners, corners[1:] + corners[:1]):
        e0, e1 = _edge_integrals(f, a, b, quad_tol, rect)
        i0 += e0
        i1 += e1
    val = i0 / (2.0j * math.pi)
    n = round(val.real)
    if abs(val - n) > 0.25:
        raise QuadratureError(
            f"contour value {val} is not within 0.25 of an integer on {rect}"
        )
    return int(n), i1 / (2.0j * math.pi)


def _inflate_rng(rect: Rectangle, attempt: int) -> float:
    # Deterministic pseudo-random inflation factor in [1.01, 1.05].
    seed = hash((round(rect.x_lo, 12), round(rect.x_hi, 12),
                 round(rect.y_lo, 12), round(rect.y_hi, 12), attempt))
    return random.Random(seed).uniform(1.01, 1.05)


def _counts_with_inflation(f: AnalyticFunctionHandle, rect: Rectangle, quad_tol: float):
    """Contour counts, inflating the rectangle on boundary-zero suspicion.

    A quadrature that refuses to stabilize is treated the same way: it is
    the signature of a zero hugging the contour just above the detection
    threshold.
    """
    current = rect
    for attempt in range(_INFLATE_ATTEMPTS + 1):
        try:
            n, m1 = _contour_counts(f, current, quad_tol)
            return n, m1, current
        except (BoundaryZeroError, QuadratureError):
            if attempt == _INFLATE_ATTEMPTS:
                raise
            current = current.scaled(_inflate_rng(current, attempt))
            f.check_clearance(current)
    raise AssertionError("unreachable")


def winding_number(f: AnalyticFunctionHandle, rect: Rectangle,
                   quad_tol: float = 1e-10) -> int:
    """Number of zeros of f inside rect, counted with multiplicity.

    Suspected boundary zeros trigger up to five retries on a rectangle
    inflated by a factor in [1.01, 1.05]; a contour value further than 0.25
    from an integer raises QuadratureError.
    """
    f.check_clearance(rect)
    n, _, _ = _counts_with_inflation(f, rect, quad_tol)
    return n


# ---------------------------------------------------------------------------
# Newton refinement
# ---------------------------------------------------------------------------

def _cabs(z: complex) -> float:
    """|z| that saturates to inf instead of raising on huge components."""
    try:
        v = abs(z)
    except OverflowError:
        return math.inf
    return v if math.isfinite(v) else math.inf


def _newton(f: AnalyticFunctionHandle, z0: complex, refine_tol: float,
            scale: float, multiplicity: int = 1, max_iter: int = 60,
            region: Optional[Rectangle] = None):
    """Damped Newton iteration; the multiplicity-m variant takes steps m*f/f'.

    Iterates past refine_tol until the residual stagnates, so locations are
    polished to the precision the arithmetic supports rather than stopping
    at the first sub-tolerance value.  Steps leaving the confinement region
    are treated as uphill and damped.
    """
    z = z0
    fz = f(z)
    best_z, best_res = z, _cabs(fz)
    for _ in range(max_iter):
        if _cabs(fz) == 0.0:
            break
        df = f.deriv(z, scale)
        if df == 0 or not math.isfinite(_cabs(df)):
            break
        step = multiplicity * fz / df
        t = 1.0
        for _ in range(30):
            z_new = z - t * step
            if region is not None and not region.contains(z_new):
                t *= 0.5
                continue
            f_new = f(z_new)
            if _cabs(f_new) < _cabs(fz):
                break
            t *= 0.5
        else:
            break
        z, fz = z_new, f_new
        if _cabs(fz) < best_res:
            best_z, best_res = z, _cabs(fz)
        if best_res < refine_tol and abs(t * step) < 1e-14 * (1.0 + abs(z)):
            break
    return (best_z, best_res) if best_res < refine_tol else (None, best_res)


def _clean_split(f: AnalyticFunctionHandle, rect: Rectangle):
    """Child rectangles split along the longer side, on the candidate line
    whose minimum |f| (relative to the line's maximum) is largest, keeping
    the cut as far from zeros as the candidates allow."""
    vertical_cut = rect.width >= rect.height
    best = None
    for frac in (0.5, 0.53, 0.47, 0.57, 0.43, 0.61, 0.39):
        if vertical_cut:
            xc = rect.x_lo + frac * rect.width
            seg = xc + 1j * np.linspace(rect.y_lo, rect.y_hi, 129)
        else:
            yc = rect.y_lo + frac * rect.height
            seg = np.linspace(rect.x_lo, rect.x_hi, 129) + 1j * yc
        fabs = np.abs(f.eval(seg))
        score = fabs.min() / max(fabs.max(), 1e-300)
        if best is None or score > best[0]:
            best = (score, frac)
            if score > 0.05:
                break
    score, frac = best
    if score <= _BOUNDARY_REL:
        raise BoundaryZeroError(rect, f"no zero-free split line found in {rect}")
    if vertical_cut:
        xc = rect.x_lo + frac * rect.width
        return (
            Rectangle(rect.x_lo, xc, rect.y_lo, rect.y_hi),
            Rectangle(xc, rect.x_hi, rect.y_lo, rect.y_hi),
        )
    yc = rect.y_lo + frac * rect.height
    return (
        Rectangle(rect.x_lo, rect.x_hi, rect.y_lo, yc),
        Rectangle(rect.x_lo, rect.x_hi, yc, rect.y_hi),
    )


def _try_multiple_root(f: AnalyticFunctionHandle, rect: Rectangle, count: int,
                       moment: complex, quad_tol: float, refine_tol: float):
    """Attempt to resolve a count >= 2 rectangle as one multiple zero."""
    z0 = moment / count
    if not rect.scaled(1.2).contains(z0):
        return None
    scale = max(abs(rect.width), abs(rect.height))
    z, res = _newton(f, z0, refine_tol, scale, multiplicity=count,
                     region=rect.scaled(2.0))
    if z is None or not rect.scaled(1.01).contains(z):
        return None
    side = 1e-5 * max(1.0, abs(z))
    for _ in range(3):
        box = Rectangle(z.real - side, z.real + side, z.imag - side, z.imag + side)
        try:
            n_box, _, _ = _counts_with_inflation(f, box, quad_tol)
        except (BoundaryZeroError, QuadratureError):
            side *= 1.37
            continue
        if n_box == count:
            return Root(z, count, res)
        return None
    return None


def find_zeros(f: AnalyticFunctionHandle, rect: Rectangle,
               quad_tol: float = 1e-10, refine_tol: float = 1e-12,
               max_depth: int = 40) -> RootSet:
    """All zeros of f in rect with multiplicities, via recursive bisection.

    Each sub-rectangle is bisected until its winding count is at most one;
    isolated zeros are polished by damped Newton to |f| < refine_tol.
    Rectangles whose count exceeds one at max_depth raise
    ClusterUnresolvedError unless they contain a verified multiple zero.
    """
    f.check_clearance(rect)
    roots: list[Root] = []

    def recurse(r: Rectangle, depth: int, top: bool) -> None:
        # Inflation on boundary-zero suspicion can make sibling rectangles
        # overlap slightly; the duplicate-merge pass below undoes the
        # resulting double counts.
        count, moment, r = _counts_with_inflation(f, r, quad_tol)
        if count == 0:
            return
        scale = max(r.width, r.height)
        if count == 1:
            z, res = _newton(f, moment, refine_tol, scale, region=r.scaled(2.0))
            if z is not None:
                roots.append(Root(z, 1, res))
                return
        else:
            found = _try_multiple_root(f, r, count, moment, quad_tol, refine_tol)
            if found is not None:
                roots.append(found)
                return
        if depth >= max_depth:
            raise ClusterUnresolvedError(r, count)
        child_a, child_b = _clean_split(f, r)
        recurse(child_a, depth + 1, False)
        recurse(child_b, depth + 1, False)

    recurse(rect, 0, True)

    # Merge duplicates that can arise from refinement across shared edges.
    merged: list[Root] = []
    for root in sorted(roots, key=lambda r: (r.location.real, r.location.imag)):
        if merged and abs(root.location - merged[-1].location) < 1e-9 * (
            1.0 + abs(root.location)
        ):
            keep = max(merged[-1], root, key=lambda r: r.multiplicity)
            merged[-1] = keep
        else:
            merged.append(root)
    return RootSet(tuple(merged))
