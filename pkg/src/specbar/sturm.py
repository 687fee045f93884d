"""Characteristic function of the barrier-perturbed half-line operator.

The interior solution is shot from 0 with a seed that satisfies the mixed
boundary condition exactly; the exterior solution decays at infinity (plane
wave for an integrable-tail potential, quasi-periodic solution for a
periodic tail).  Their Wronskian at the barrier edge R vanishes exactly at
the eigenvalues (principal sheet) or resonances (second sheet).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _ode, floquet
from .core import (
    BarrierProblem,
    DomainError,
    PeriodicTail,
    PotentialModel,
    Rectangle,
    Sheet,
    principal_sqrt,
    sheeted_sqrt,
)
from .rootfinder import (
    AnalyticFunctionHandle,
    HorizontalRay,
    RootSet,
    find_zeros,
)

__all__ = [
    "SolutionSample",
    "CharacteristicContext",
    "interior_solution",
    "exterior_solution",
    "characteristic",
    "eigenvalues",
    "resonances",
    "limit_eigenvalues",
    "reference_characteristic",
    "pollution_factor",
    "pollution_zeros",
    "calibrated_context",
]


@dataclass(frozen=True)
class SolutionSample:
    """Solution value and derivative at a point, with a magnitude offset.

    The represented solution values are (value, derivative) * exp(log_scale);
    the factor is split off so that strongly growing solutions stay inside
    floating-point range.  Fields may be ndarrays for vectorized spectral
    parameters.
    """

    value: complex
    derivative: complex
    x: float
    log_scale: float = 0.0


@dataclass(frozen=True)
class CharacteristicContext:
    """Spectral-parameter-independent data of one characteristic function."""

    problem: BarrierProblem
    sheet: Sheet = Sheet.PRINCIPAL
    ode_step: float = 1e-3
    standoff: float = 1e-3

    def __post_init__(self):
        if self.ode_step <= 0:
            raise ValueError("ode_step must be positive")
        if self.ode_step > self.problem.R / 16.0:
            raise ValueError(
                f"ode_step {self.ode_step} too coarse for R = {self.problem.R}"
                " (need ode_step <= R/16)"
            )
        if self.standoff <= 0:
            raise ValueError("standoff must be positive")


def _is_scalar(z) -> bool:
    return np.isscalar(z) or getattr(z, "ndim", 0) == 0


def _sample(value, derivative, x, logs, scalar: bool) -> SolutionSample:
    if scalar:
        return SolutionSample(complex(value), complex(derivative), x, float(logs))
    return SolutionSample(value, derivative, x, logs)


# ---------------------------------------------------------------------------
# Interior and exterior solutions
# ---------------------------------------------------------------------------

def _interior_arrays(ctx: CharacteristicContext, lam):
    model = ctx.problem.model
    lam = np.asarray(lam, dtype=complex)
    eta = complex(model.eta)
    u0 = np.full(lam.shape, complex(np.sin(eta)))
    up0 = np.full(lam.shape, complex(np.cos(eta)))
    return _ode.propagate(model, lam, 0.0, ctx.problem.R, u0, up0,
                          q_add=1j * ctx.problem.gamma, step=ctx.ode_step)


def interior_solution(ctx: CharacteristicContext, lam) -> SolutionSample:
    """Shoot -u'' + (q + i gamma) u = lam u from 0 to the barrier edge R.

    The seed (u, u')(0) = (sin eta, cos eta) satisfies the mixed boundary
    condition identically.  Constant stretches of the potential are
    propagated by exact transfer matrices, sinusoidal ones by RK4 at
    ctx.ode_step.
    """
    scalar = _is_scalar(lam)
    u, up, logs = _interior_arrays(ctx, lam)
    return _sample(u, up, ctx.problem.R, logs, scalar)


def _check_zero_tail_clearance(lam, standoff: float, what: str):
    lam = np.asarray(lam, dtype=complex)
    dist = np.where(lam.real >= 0.0, np.abs(lam.imag), np.abs(lam))
    if np.min(dist) < standoff:
        raise DomainError(
            f"{what} within standoff {standoff} of the essential spectrum ray"
        )


def _exterior_arrays(ctx: CharacteristicContext, lam, check: bool = True):
    model = ctx.problem.model
    R = ctx.problem.R
    lam = np.asarray(lam, dtype=complex)
    if isinstance(model.tail, PeriodicTail):
        val, der, logs = floquet._solution_arrays(
            model, R, lam, "plus", ctx.sheet, ctx.ode_step
        )
        return val, der, logs
    if check:
        _check_zero_tail_clearance(lam, ctx.standoff, "spectral parameter")
    k = sheeted_sqrt(lam, ctx.sheet)
    xt = max(R, model.compact_end)
    v = np.exp(1j * k * xt)
    vp = 1j * k * v
    if xt > R:
        u, up, logs = _ode.propagate(model, lam, xt, R, v, vp, step=ctx.ode_step)
        return u, up, logs
    return v, vp, np.zeros(lam.shape)


def exterior_solution(ctx: CharacteristicContext, lam) -> SolutionSample:
    """Decaying-at-infinity solution of the unperturbed equation, taken at R.

    For a zero tail this is exp(i k x) with k = sheeted_sqrt(lam, sheet),
    propagated backwards through any compact pieces beyond R; for a periodic
    tail it is the quasi-periodic solution with the (possibly continued)
    decaying multiplier.
    """
    scalar = _is_scalar(lam)
    val, der, logs = _exterior_arrays(ctx, lam)
    return _sample(val, der, ctx.problem.R, logs, scalar)


# ---------------------------------------------------------------------------
# Characteristic function
# ---------------------------------------------------------------------------

def _characteristic_parts(ctx: CharacteristicContext, lam, check: bool = True):
    """Normalized Wronskian and the log factor it was scaled by."""
    u, up, li = _interior_arrays(ctx, lam)
    v, vp, le = _exterior_arrays(ctx, lam, check=check)
    return u * vp - up * v, li + le


def characteristic(ctx: CharacteristicContext, lam):
    """Wronskian u(R) psi'(R) - u'(R) psi(R) of interior and exterior solutions.

    Zeros in the admissible region are exactly the eigenvalues (principal
    sheet) or resonances (second sheet) of the barrier problem.
    """
    scalar = _is_scalar(lam)
    w, logs = _characteristic_parts(ctx, lam)
    out = w * np.exp(logs)
    return complex(out) if scalar else out


def _damped_handle(ctx: CharacteristicContext,
                   exclusions=()) -> AnalyticFunctionHandle:
    """Root-finding handle: the Wronskian times an analytic damping factor.

    The factor exp(i k_int R - i k_ext x_t) cancels the exponential growth
    of the interior solution and the exterior normalization, keeping |f|
    of moderate size uniformly over large rectangles without moving any
    zeros; it is analytic wherever the characteristic itself is.
    """
    model = ctx.problem.model
    R = ctx.problem.R
    gamma = ctx.problem.gamma
    periodic = isinstance(model.tail, PeriodicTail)
    xt = max(R, model.compact_end)

    def f(lam):
        lam = np.asarray(lam, dtype=complex)
        w, logs = _characteristic_parts(ctx, lam, check=False)
        expo = logs + 1j * principal_sqrt(lam - 1j * gamma) * R
        if not periodic:
            expo = expo - 1j * sheeted_sqrt(lam, ctx.sheet) * xt
        return w * np.exp(expo)

    return AnalyticFunctionHandle(eval=f, exclusions=tuple(exclusions))


def _zero_tail_exclusions(gamma: complex, pad: float):
    shift = 1j * complex(gamma)
    return (
        HorizontalRay(0.0, 0.0, pad),
        HorizontalRay(shift.real, shift.imag, pad),
    )


def _periodic_exclusions(model, gamma, rect: Rectangle, pad: float,
                         ode_step: float):
    shift = 1j * complex(gamma)
    margin = abs(shift.real) + 1.0
    lo = min(rect.x_lo, rect.x_lo - shift.real) - margin
    hi = max(rect.x_hi, rect.x_hi - shift.real) + margin
    bs = floquet.bands(model, lo, hi, ode_step=ode_step)
    return floquet.band_exclusions(bs, 0.0, pad) + floquet.band_exclusions(
        bs, shift, pad
    )


def _search_exclusions(ctx: CharacteristicContext, rect: Rectangle):
    model = ctx.problem.model
    if isinstance(model.tail, PeriodicTail):
        return _periodic_exclusions(model, ctx.problem.gamma, rect,
                                    ctx.standoff, ctx.ode_step)
    return _zero_tail_exclusions(ctx.problem.gamma, ctx.standoff)


def eigenvalues(ctx: CharacteristicContext, rect: Rectangle,
                quad_tol: float = 1e-10, refine_tol: float = 1e-12,
                max_depth: int = 40) -> RootSet:
    """All eigenvalues of the barrier problem inside rect (principal sheet).

    The rectangle must keep the context's standoff distance from the
    essential spectrum of the background and its barrier shift.
    """
    if ctx.sheet is not Sheet.PRINCIPAL:
        raise DomainError("eigenvalue search requires the principal sheet")
    handle = _damped_handle(ctx, _search_exclusions(ctx, rect))
    return find_zeros(handle, rect, quad_tol=quad_tol, refine_tol=refine_tol,
                      max_depth=max_depth)


def resonances(ctx: CharacteristicContext, rect: Rectangle,
               quad_tol: float = 1e-10, refine_tol: float = 1e-12,
               max_depth: int = 40) -> RootSet:
    """Second-sheet zeros of the characteristic in a lower-right rectangle."""
    if ctx.sheet is not Sheet.SECOND:
        raise DomainError("resonance search requires the second sheet")
    if rect.x_lo < 0 or rect.y_hi > 0:
        raise DomainError(
            "resonance rectangles must lie in the lower right quadrant"
        )
    handle = _damped_handle(ctx, _search_exclusions(ctx, rect))
    return find_zeros(handle, rect, quad_tol=quad_tol, refine_tol=refine_tol,
                      max_depth=max_depth)


# ---------------------------------------------------------------------------
# Limit operator
# ---------------------------------------------------------------------------

def _limit_function_arrays(model: PotentialModel, gamma: complex, lam,
                           ode_step: float, standoff: float):
    """Boundary form of the decaying solution at the shifted parameter.

    Zeros are the eigenvalues of the limit operator (background plus the
    constant barrier i gamma).
    """
    lam = np.asarray(lam, dtype=complex)
    z = lam - 1j * gamma
    eta = complex(model.eta)
    if isinstance(model.tail, PeriodicTail):
        val, der, logs = floquet._solution_arrays(
            model, 0.0, z, "plus", Sheet.PRINCIPAL, ode_step
        )
    else:
        _check_zero_tail_clearance(z, standoff, "shifted spectral parameter")
        k = principal_sqrt(z)
        xt = model.compact_end
        v = np.exp(1j * k * xt)
        vp = 1j * k * v
        if xt > 0:
            val, der, logs = _ode.propagate(model, z, xt, 0.0, v, vp,
                                            step=ode_step)
        else:
            val, der, logs = v, vp, np.zeros(z.shape)
    return (np.cos(eta) * val - np.sin(eta) * der) * np.exp(logs)


def limit_eigenvalues(model: PotentialModel, gamma: complex, rect: Rectangle,
                      ode_step: float = 1e-3, standoff: float = 1e-3,
                      quad_tol: float = 1e-10, refine_tol: float = 1e-12,
                      max_depth: int = 40) -> RootSet:
    """Eigenvalues of the limit operator inside rect.

    These are the zeros of the boundary form of the decaying solution at
    the shifted spectral parameter; gamma = 0 recovers the unshifted
    background operator.
    """
    gamma = complex(gamma)
    shift = 1j * gamma
    if isinstance(model.tail, PeriodicTail):
        margin = abs(shift.real) + 1.0
        bs = floquet.bands(model, rect.x_lo - shift.real - margin,
                           rect.x_hi - shift.real + margin, ode_step=ode_step)
        exclusions = floquet.band_exclusions(bs, shift, standoff)
    else:
        exclusions = (HorizontalRay(shift.real, shift.imag, standoff),)

    def f(lam):
        return _limit_function_arrays(model, gamma, lam, ode_step, standoff)

    handle = AnalyticFunctionHandle(eval=f, exclusions=exclusions)
    return find_zeros(handle, rect, quad_tol=quad_tol, refine_tol=refine_tol,
                      max_depth=max_depth)


# ---------------------------------------------------------------------------
# Closed-form references
# ---------------------------------------------------------------------------

def reference_characteristic(example: str, lam, R: float,
                             R0: Optional[float] = None,
                             sheet: Sheet = Sheet.PRINCIPAL):
    """Closed-form characteristic functions of the two worked examples.

    ``ex1`` is the free background with a unit barrier; ``ex2`` stacks the
    unit barrier on a background that is i on [0, R0).  The sheet selector
    continues the outermost square root across the positive half-axis.
    """
    scalar = _is_scalar(lam)
    lam = np.asarray(lam, dtype=complex)
    s = sheeted_sqrt(lam, sheet)
    if example == "ex1":
        w = principal_sqrt(lam - 1j)
        out = 1j * s * np.sin(w * R) - w * np.cos(w * R)
    elif example == "ex2":
        if R0 is None or not 0 < R0 <= R:
            raise ValueError("ex2 requires R >= R0 > 0")
        wi = principal_sqrt(lam - 1j)
        w2 = principal_sqrt(lam - 2j)
        kap = (wi - s) / (wi + s)
        ee = np.exp(-2j * wi * (R - R0))
        out = (1j * wi * (ee - kap) * np.sin(w2 * R0)
               - w2 * (ee + kap) * np.cos(w2 * R0))
    else:
        raise ValueError(f"unknown example {example!r}")
    return complex(out) if scalar else out


# ---------------------------------------------------------------------------
# Pollution diagnostics for integrable-tail backgrounds
# ---------------------------------------------------------------------------

def pollution_factor(model: PotentialModel, gamma: complex, R: float, lam):
    """Cross-Wronskian of the normalized tail solutions at the barrier edge.

    For an integrable (zero-tail) background this converges, as R grows, to
    -i (sqrt(lam - i gamma) + sqrt(lam)), which never vanishes; its zeros
    locate persistent pollution, so the limit being bounded away from zero
    certifies an empty pollution set away from the essential spectrum.
    """
    if isinstance(model.tail, PeriodicTail):
        raise DomainError("pollution_factor applies to zero-tail models")
    scalar = _is_scalar(lam)
    lam = np.asarray(lam, dtype=complex)
    z = lam - 1j * complex(gamma)
    kp = principal_sqrt(lam)
    km = principal_sqrt(z)
    xt = model.compact_end

    def tail_solution(k, zz, sign):
        v = np.exp(sign * 1j * k * xt)
        vp = sign * 1j * k * v
        if xt > R:
            u, up, logs = _ode.propagate(model, zz, xt, R, v, vp)
            return u * np.exp(logs), up * np.exp(logs)
        u, up = v, vp
        if xt < R:
            # beyond the pieces the solution stays a pure exponential
            u = np.exp(sign * 1j * k * R)
            up = sign * 1j * k * u
        return u, up

    vp_, dp_ = tail_solution(kp, lam, +1)
    vm_, dm_ = tail_solution(km, z, -1)
    # remove the exponential carriers: psi~_+ = e^{-i k R} psi_+ etc.
    cp = np.exp(-1j * kp * R)
    cm = np.exp(1j * km * R)
    out = (vp_ * cp) * (dm_ * cm) - (dp_ * cp) * (vm_ * cm)
    return complex(out) if scalar else out


def pollution_zeros(model: PotentialModel, gamma: complex, x0: float,
                    rect: Rectangle, standoff: float = 1e-3,
                    ode_step: float = 1e-3, quad_tol: float = 1e-10,
                    refine_tol: float = 1e-12, max_depth: int = 40) -> RootSet:
    """Zeros in rect of the pollution cross-Wronskian for a zero-tail model.

    The integrable case provably has none away from the essential spectrum;
    an empty result is the expected outcome.
    """
    if isinstance(model.tail, PeriodicTail):
        raise DomainError("pollution_zeros applies to zero-tail models; "
                          "use floquet.sp_zeros for periodic tails")

    def f(lam):
        return pollution_factor(model, gamma, x0, np.asarray(lam, dtype=complex))

    handle = AnalyticFunctionHandle(
        eval=f, exclusions=_zero_tail_exclusions(gamma, standoff)
    )
    return find_zeros(handle, rect, quad_tol=quad_tol, refine_tol=refine_tol,
                      max_depth=max_depth)


def calibrated_context(ctx: CharacteristicContext, probe_lam: complex,
                       agree_tol: float = 1e-9,
                       min_step: float = 1e-6) -> CharacteristicContext:
    """Halve ode_step until two successive characteristic values agree.

    Only sinusoidal potential stretches depend on the step, so models built
    purely from constants return the context unchanged after one check.
    """
    current = ctx
    w_prev = characteristic(current, probe_lam)
    while current.ode_step * 0.5 >= min_step:
        trial = replace(current, ode_step=current.ode_step * 0.5)
        w = characteristic(trial, probe_lam)
        if abs(w - w_prev) <= agree_tol * max(1.0, abs(w)):
            return current
        current, w_prev = trial, w
    return current
