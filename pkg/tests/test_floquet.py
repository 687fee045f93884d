import math

import numpy as np
import pytest
from scipy.special import mathieu_a, mathieu_b

from specbar.core import (
    ConstExpr,
    DomainError,
    PeriodicTail,
    Piece,
    PotentialModel,
    Rectangle,
    Sheet,
    principal_sqrt,
)
from specbar.floquet import (
    BandStructure,
    BranchPointError,
    bands,
    embedded_resonances,
    floquet_data,
    floquet_solution,
    monodromy,
    sp_zeros,
)

from conftest import STACKED_EMBEDDED_RESONANCE_RE

# First stability interval of -u'' + sin(x) u, from the Mathieu
# characteristic values: [a_0(2)/4, b_1(2)/4].
SIN_BAND_1 = (mathieu_a(0, 2) / 4.0, mathieu_b(1, 2) / 4.0)


def test_monodromy_free_closed_form(free_periodic_model):
    z = 2.7 - 0.3j
    m = monodromy(free_periodic_model, z)
    w = principal_sqrt(z)
    assert abs(m.phi1_end - np.cos(w)) < 1e-12
    assert abs(m.phi2p_end - np.cos(w)) < 1e-12
    assert abs(m.phi2_end - np.sin(w) / w) < 1e-12


def test_monodromy_determinant_identity(sin_model):
    # Abel identity at the scale of the Wronskian products: cell solutions
    # grow to ~1e6 at the deep end of the sample box, so the identity can
    # only be verified relative to that magnitude
    rng = np.random.default_rng(8)
    z = rng.uniform(-5, 5, 100) + 1j * rng.uniform(-1, 1, 100)
    m = monodromy(sin_model, z)
    scale = np.maximum(1.0, np.abs(m.phi1_end * m.phi2p_end)
                       + np.abs(m.phi1p_end * m.phi2_end))
    assert np.max(np.abs(m.det - 1.0) / scale) < 1e-10


def test_monodromy_requires_periodic_tail(free_model):
    with pytest.raises(DomainError):
        monodromy(free_model, 1.0)


def test_discriminant_inside_first_band(sin_model):
    m = monodromy(sin_model, -0.36)
    assert abs(m.discriminant) < 2.0


def test_floquet_data_free_exponent(free_periodic_model):
    for z in (-1.0, -2 + 1j, 3 + 2j):
        fd = floquet_data(free_periodic_model, z)
        assert abs(fd.k - principal_sqrt(z)) < 1e-10
        assert abs(fd.rho_plus * fd.rho_minus - 1.0) < 1e-12


def test_multiplier_identities(sin_model):
    rng = np.random.default_rng(9)
    z = rng.uniform(-5, 5, 100) + 1j * rng.uniform(0.05, 1, 100)
    fd = floquet_data(sin_model, z)
    assert np.max(np.abs(fd.rho_plus * fd.rho_minus - 1.0)) < 1e-12
    # trace identity, relative to |D| once the discriminant is large
    scale = np.maximum(1.0, np.abs(fd.D))
    assert np.max(np.abs(fd.rho_plus + fd.rho_minus - fd.D) / scale) < 1e-10


def test_exponent_positive_imag_off_bands(sin_model):
    rng = np.random.default_rng(10)
    z = rng.uniform(-5, 5, 60) + 1j * rng.uniform(0.01, 1.5, 60)
    fd = floquet_data(sin_model, z)
    assert np.min(fd.k.imag) > 0.0
    fd2 = floquet_data(sin_model, z, sheet=Sheet.SECOND)
    assert np.max(fd2.k.imag) < 0.0


def test_branch_point_guard(free_periodic_model):
    # z = 0 has D = 2 exactly for the free cell
    with pytest.raises(BranchPointError):
        floquet_data(free_periodic_model, 0.0)


def test_bands_free_half_line(free_periodic_model):
    bs = bands(free_periodic_model, -1.0, 5.0, tol=1e-10)
    assert len(bs.bands) == 1
    lo, hi = bs.bands[0]
    assert abs(lo) < 1e-8
    assert hi == 5.0


def test_bands_sin_first_interval(sin_model):
    bs = bands(sin_model, -1.0, 0.0, tol=1e-10)
    assert len(bs.bands) == 1
    lo, hi = bs.bands[0]
    # paper values, quoted to 4 decimals
    assert abs(lo - (-0.3785)) < 1e-3
    assert abs(hi - (-0.3477)) < 1e-3
    # independent special-function oracle
    assert abs(lo - SIN_BAND_1[0]) < 1e-6
    assert abs(hi - SIN_BAND_1[1]) < 1e-6


def test_bands_sorted_disjoint_with_end_residuals(sin_model):
    tol = 1e-8
    bs = bands(sin_model, -1.0, 1.5, tol=tol)
    assert list(bs.bands) == sorted(bs.bands)
    for (a, b), (c, d) in zip(bs.bands, bs.bands[1:]):
        assert b < c
    for e in bs.band_ends:
        if -1.0 < e < 1.5:  # interior ends are genuine |D| = 2 points
            m = monodromy(sin_model, e)
            assert abs(abs(m.discriminant.real) - 2.0) < 10 * tol


def test_bands_stable_under_step_halving(sin_model):
    a = bands(sin_model, -1.0, 0.0, tol=1e-10, ode_step=2e-3, grid=600)
    b = bands(sin_model, -1.0, 0.0, tol=1e-10, ode_step=1e-3, grid=600)
    for (x, y), (u, v) in zip(a.bands, b.bands):
        assert abs(x - u) < 1e-6
        assert abs(y - v) < 1e-6


def test_band_structure_distance():
    bs = BandStructure(((0.0, 1.0), (2.0, 3.0)))
    assert bs.distance(0.5) == 0.0
    assert bs.distance(1.5) == 0.5
    assert bs.distance(-1.0) == 1.0
    assert bs.contains(2.9)


def test_quasi_periodicity(sin_model):
    z = -0.5 + 0.3j
    a = 2 * math.pi
    fd = floquet_data(sin_model, z)
    rng = np.random.default_rng(4)
    for x0 in rng.uniform(0, a, 20):
        s1 = floquet_solution(sin_model, float(x0), z)
        s2 = floquet_solution(sin_model, float(x0) + 3 * a, z)
        v1 = s1.value * np.exp(s1.log_scale)
        v2 = s2.value * np.exp(s2.log_scale)
        assert abs(v2 - np.exp(3j * fd.k * a) * v1) < 1e-9
        d1 = s1.derivative * np.exp(s1.log_scale)
        d2 = s2.derivative * np.exp(s2.log_scale)
        assert abs(d2 - np.exp(3j * fd.k * a) * d1) < 1e-9


def test_solution_satisfies_equation(sin_model):
    # second-difference residual of -psi'' + q psi = z psi on a grid
    z = -0.2 + 0.4j
    h = 1e-3
    xs = np.linspace(0.5, 2.5, 9)
    vals = {}
    for x in np.concatenate([xs - h, xs, xs + h]):
        s = floquet_solution(sin_model, float(x), z)
        vals[float(x)] = s.value * np.exp(s.log_scale)
    scale = max(abs(v) for v in vals.values())
    for x in xs:
        x = float(x)
        second = (vals[x - h] - 2 * vals[x] + vals[x + h]) / h**2
        q = math.sin(x)
        resid = -second + (q - z) * vals[x]
        assert abs(resid) < 1e-6 * scale


def test_free_solution_is_plane_wave(free_periodic_model):
    z = -1.5 + 0.2j
    s0 = floquet_solution(free_periodic_model, 0.0, z)
    s1 = floquet_solution(free_periodic_model, 2.7, z)
    ratio = (s1.value * np.exp(s1.log_scale)) / (s0.value * np.exp(s0.log_scale))
    assert abs(ratio - np.exp(1j * principal_sqrt(z) * 2.7)) < 1e-9


def test_floquet_solution_backward_below_cell():
    # tail starting beyond a compact piece: values below the cell start are
    # integrated backwards and must still solve the equation there
    model = PotentialModel(
        pieces=(Piece(0.0, 1.0, ConstExpr(0.5)),),
        tail=PeriodicTail(period=1.0, start=1.0, expr=ConstExpr(0.0)),
    )
    z = -0.7 + 0.1j
    h = 1e-4
    vals = []
    for x in (0.5 - h, 0.5, 0.5 + h):
        s = floquet_solution(model, x, z)
        vals.append(s.value * np.exp(s.log_scale))
    second = (vals[0] - 2 * vals[1] + vals[2]) / h**2
    resid = -second + (0.5 - z) * vals[1]
    assert abs(resid) < 1e-5 * abs(vals[1])


def test_sp_zeros_free_tail_empty(free_periodic_model):
    out = sp_zeros(free_periodic_model, 1.0, 0.0,
                   Rectangle(-3.0, 3.0, 0.05, 0.95))
    assert out.total_count == 0


def test_sp_zeros_residual_contract_and_isolation(sin_model):
    # a coarser cell step keeps this scan fast; RK4 at 4e-3 still resolves
    # the cell to ~1e-9
    out = sp_zeros(sin_model, 0.25, 0.0, Rectangle(-0.3, 0.5, 0.02, 0.23),
                   ode_step=4e-3)
    for r in out.roots:
        assert r.residual < 1e-10
    locs = out.locations
    for i in range(len(locs)):
        for j in range(i + 1, len(locs)):
            assert abs(locs[i] - locs[j]) > 1e-4


def test_sp_zeros_validates_cell_offset(sin_model):
    with pytest.raises(DomainError):
        sp_zeros(sin_model, 0.25, 10.0, Rectangle(-0.3, 0.5, 0.02, 0.23))


def test_embedded_resonances_free_zero_tail(free_model):
    assert embedded_resonances(free_model, (0.2, 4.0), tol=1e-8) == []


def test_embedded_resonances_stacked_compact(stacked_model):
    # the upper-continued boundary form of the stacked background has a
    # near-real zero; the scan locates its real-axis crossing
    out = embedded_resonances(stacked_model, (2.5, 4.0), tol=1e-2)
    assert len(out) == 1
    assert abs(out[0] - STACKED_EMBEDDED_RESONANCE_RE) < 5e-3
    # at a tight residual tolerance the slightly-off-axis zero is rejected
    assert embedded_resonances(stacked_model, (2.5, 4.0), tol=1e-8) == []


def test_embedded_resonances_band_validation(sin_model):
    with pytest.raises(DomainError):
        embedded_resonances(sin_model, (-0.9, -0.5), tol=1e-6,
                            ode_step=4e-3)  # in a gap
    assert embedded_resonances(
        sin_model, (SIN_BAND_1[0] + 5e-3, SIN_BAND_1[1] - 5e-3), tol=1e-6,
        grid=400, ode_step=4e-3,
    ) == []


def test_exponent_continuation_toward_band(sin_model):
    # approaching a band interior from above, Im k vanishes linearly
    prev = None
    for eps in (1e-2, 1e-4, 1e-6):
        fd = floquet_data(sin_model, -0.36 + 1j * eps)
        assert fd.k.imag > 0
        if prev is not None:
            assert fd.k.imag < prev
        prev = fd.k.imag
    assert prev < 1e-4
