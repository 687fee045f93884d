import numpy as np
import pytest

from specbar.core import DomainError, Rectangle
from specbar.rootfinder import (
    AnalyticFunctionHandle,
    ClusterUnresolvedError,
    HorizontalRay,
    QuadratureError,
    find_zeros,
    winding_number,
)

from conftest import grid_newton_roots, oracle_f_free

UNIT = Rectangle(-1.0, 1.0, -1.0, 1.0)


def _poly_handle(coeffs):
    return AnalyticFunctionHandle(eval=lambda z, c=coeffs: np.polyval(c, z))


def test_winding_monomial():
    assert winding_number(AnalyticFunctionHandle(eval=lambda z: z**3), UNIT) == 3


def test_winding_no_zero():
    assert winding_number(AnalyticFunctionHandle(eval=lambda z: z - 5), UNIT) == 0


def test_winding_uses_supplied_derivative():
    f = AnalyticFunctionHandle(eval=lambda z: z**2 - 0.25,
                               eval_deriv=lambda z: 2 * z)
    assert winding_number(f, UNIT) == 2


def test_winding_closed_form_characteristic():
    f = AnalyticFunctionHandle(eval=lambda z: oracle_f_free(z, 10.0))
    rect = Rectangle(0.1, 5.0, 0.05, 0.95)
    n = winding_number(f, rect)
    oracle = grid_newton_roots(lambda z: oracle_f_free(z, 10.0),
                               (0.1, 5.0, 0.05, 0.95))
    assert n == len(oracle)
    assert n >= 1


def test_find_zeros_constructed_pair():
    f = AnalyticFunctionHandle(eval=lambda z: (z - 0.3) * (z + 0.4j))
    out = find_zeros(f, UNIT)
    locs = sorted(out.locations, key=lambda z: z.real)
    assert len(locs) == 2
    assert abs(locs[0] - (-0.4j)) < 1e-10
    assert abs(locs[1] - 0.3) < 1e-10
    assert all(r.multiplicity == 1 for r in out.roots)


def test_find_zeros_double_root():
    f = AnalyticFunctionHandle(eval=lambda z: (z - 0.3) ** 2)
    out = find_zeros(f, UNIT)
    assert len(out.roots) == 1
    root = out.roots[0]
    assert root.multiplicity == 2
    assert abs(root.location - 0.3) < 1e-9
    assert out.total_count == 2


def test_find_zeros_triple_with_simple():
    f = AnalyticFunctionHandle(eval=lambda z: (z - 0.3) ** 3 * (z + 0.5 + 0.2j))
    out = find_zeros(f, UNIT)
    mults = sorted(r.multiplicity for r in out.roots)
    assert mults == [1, 3]


def test_closed_form_roots_in_strip():
    f = AnalyticFunctionHandle(eval=lambda z: oracle_f_free(z, 10.0))
    rect = Rectangle(0.1, 5.0, 0.05, 0.95)
    out = find_zeros(f, rect)
    oracle = grid_newton_roots(lambda z: oracle_f_free(z, 10.0),
                               (0.1, 5.0, 0.05, 0.95))
    assert out.total_count == len(oracle)
    got = sorted(out.locations, key=lambda z: (z.real, z.imag))
    assert max(abs(a - b) for a, b in zip(got, oracle)) < 1e-9
    assert all(0.0 <= z.imag <= 1.0 for z in got)


def test_winding_additivity_over_bisection():
    rng = np.random.default_rng(11)
    rect = Rectangle(-1.3, 1.1, -1.2, 1.15)
    xm = rect.x_lo + 0.5 * rect.width
    left = Rectangle(rect.x_lo, xm, rect.y_lo, rect.y_hi)
    right = Rectangle(xm, rect.x_hi, rect.y_lo, rect.y_hi)
    for _ in range(50):
        deg = int(rng.integers(1, 9))
        roots = rng.uniform(-2, 2, deg) + 1j * rng.uniform(-2, 2, deg)
        f = _poly_handle(np.poly(roots))
        assert winding_number(f, rect) == (winding_number(f, left)
                                           + winding_number(f, right))


def test_random_polynomial_recovery():
    rng = np.random.default_rng(7)
    for _ in range(100):
        deg = int(rng.integers(2, 9))
        while True:
            roots = rng.uniform(-0.9, 0.9, deg) + 1j * rng.uniform(-0.9, 0.9, deg)
            if all(abs(roots[i] - roots[j]) >= 0.05
                   for i in range(deg) for j in range(i + 1, deg)):
                break
        out = find_zeros(_poly_handle(np.poly(roots)), UNIT)
        got = sorted(out.locations, key=lambda z: (z.real, z.imag))
        want = sorted(map(complex, roots), key=lambda z: (z.real, z.imag))
        assert len(got) == len(want)
        assert all(r.multiplicity == 1 for r in out.roots)
        assert max(abs(a - b) for a, b in zip(got, want)) < 1e-10


def test_no_invented_roots():
    rng = np.random.default_rng(23)
    for _ in range(20):
        deg = int(rng.integers(1, 7))
        roots = rng.uniform(-0.8, 0.8, deg) + 1j * rng.uniform(-0.8, 0.8, deg)
        out = find_zeros(_poly_handle(np.poly(roots)), UNIT, refine_tol=1e-12)
        assert all(r.residual < 1e-12 for r in out.roots)


def test_boundary_zero_inflates_and_recovers():
    # zero exactly on the requested boundary: the search inflates the
    # rectangle by a factor in [1.01, 1.05] and proceeds
    f = AnalyticFunctionHandle(eval=lambda z: z - 1.0)
    n = winding_number(f, Rectangle(0.0, 1.0, -0.5, 0.5))
    assert n == 1
    out = find_zeros(f, Rectangle(0.0, 1.0, -0.5, 0.5))
    assert out.total_count == 1
    assert abs(out.roots[0].location - 1.0) < 1e-10


def test_non_integer_contour_raises_quadrature_error():
    # a log-derivative whose contour integral is half-integral (here an
    # inconsistent derivative is supplied on purpose) must be rejected
    f = AnalyticFunctionHandle(eval=lambda z: z,
                               eval_deriv=lambda z: np.full(z.shape, 0.5))
    with pytest.raises(QuadratureError):
        winding_number(f, UNIT)


def test_cluster_unresolved_at_max_depth():
    # two distinct roots 2e-4 apart cannot be separated in three levels and
    # fail the multiple-root verification, so the cluster is reported
    f = AnalyticFunctionHandle(eval=lambda z: (z - 0.1) * (z - 0.1 - 2e-4))
    with pytest.raises(ClusterUnresolvedError) as exc:
        find_zeros(f, UNIT, max_depth=3)
    assert exc.value.count == 2
    assert isinstance(exc.value.rect, Rectangle)


def test_exclusion_regions_block_search():
    f = AnalyticFunctionHandle(
        eval=lambda z: z - 0.5,
        exclusions=(HorizontalRay(0.0, 0.0, 1e-3),),
    )
    with pytest.raises(DomainError):
        winding_number(f, Rectangle(-1.0, 1.0, -0.5, 0.5))
    # a rectangle clear of the excluded ray works
    assert winding_number(f, Rectangle(-1.0, 1.0, 0.1, 0.5)) == 0


def test_deterministic_inflation():
    f = AnalyticFunctionHandle(eval=lambda z: z - 1.0)
    rect = Rectangle(0.0, 1.0, -0.5, 0.5)
    a = find_zeros(f, rect)
    b = find_zeros(f, rect)
    assert a == b
