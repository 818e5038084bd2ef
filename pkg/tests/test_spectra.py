import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from helpers import laplacian_eigenvalues, random_reflection, random_trig_polynomial

from gltlab.errors import InvalidParameterError, ModeError
from gltlab.matgen import toeplitz
from gltlab.spectra import (
    TestFunction,
    cosine_bump,
    default_basket,
    distribution_check,
    empirical_functional,
    non_increasing,
    poly_on_window,
    quantile_compare,
    range_check,
    schatten_norm,
    spectrum,
    symbol_functional,
    trending_to_zero,
)
from gltlab.symbols import (
    CoefficientFunction,
    ConstantSymbol,
    SymbolProduct,
    TrigPolynomial,
)

LAP = TrigPolynomial(1, 1, {(0,): [[2.0]], (1,): [[-1.0]], (-1,): [[-1.0]]})

BLOCK_F = TrigPolynomial(
    1, 2,
    {
        (0,): [[0.0, 1.0], [1.0, 0.0]],
        (1,): [[0.0, 0.0], [1.0, 0.0]],
        (-1,): [[0.0, 1.0], [0.0, 0.0]],
    },
)

WIDE_X = poly_on_window(1, -100.0, 100.0, "x")
WIDE_X2 = poly_on_window(2, -100.0, 100.0, "x^2")


def test_spectrum_laplacian_closed_form():
    lam = spectrum(toeplitz(LAP, 4), "lambda")
    expect = np.sort(laplacian_eigenvalues(4))
    assert np.allclose(lam, expect, atol=1e-12)
    assert abs(lam[0] - 0.3819660112501051) < 1e-12
    assert abs(lam[-1] - 3.618033988749895) < 1e-12


def test_spectrum_identity_and_diag():
    assert np.allclose(spectrum(np.eye(3), "sigma"), [1, 1, 1])
    assert np.allclose(spectrum(np.diag([3.0, -4.0]), "sigma"), [4, 3])


def test_spectrum_canonical_complex_order():
    a = np.diag([1 + 2j, 1 - 2j, 0.5])
    lam = spectrum(a, "lambda")
    assert np.allclose(lam, [0.5, 1 - 2j, 1 + 2j])


def test_schatten_examples():
    n = 6
    assert abs(schatten_norm(np.eye(n), 3) - n ** (1 / 3)) < 1e-12
    u = np.random.default_rng(0).standard_normal(5)
    u /= np.linalg.norm(u)
    v = np.random.default_rng(1).standard_normal(5)
    v /= np.linalg.norm(v)
    assert abs(schatten_norm(np.outer(u, v), 1.7) - 1.0) < 1e-12
    assert abs(schatten_norm(toeplitz(LAP, 8), 2) - np.sqrt(46.0)) < 1e-12
    assert abs(schatten_norm(np.eye(4), np.inf) - 1.0) < 1e-15


def test_schatten_frobenius_identity():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    assert abs(schatten_norm(a, 2) ** 2 - np.sum(np.abs(a) ** 2)) < 1e-10


def test_schatten_invalid_p():
    with pytest.raises(InvalidParameterError):
        schatten_norm(np.eye(2), 0.5)


@given(
    a=arrays(np.float64, (5, 5), elements=st.floats(-10, 10)),
    b=arrays(np.float64, (5, 5), elements=st.floats(-10, 10)),
    p=st.sampled_from([1.0, 1.5, 2.0, 3.0, np.inf]),
)
@settings(max_examples=40, deadline=None)
def test_schatten_triangle_inequality(a, b, p):
    assert schatten_norm(a + b, p) <= schatten_norm(a, p) + schatten_norm(b, p) + 1e-9


def test_empirical_functional_examples():
    lam = spectrum(toeplitz(LAP, 8), "lambda")
    assert abs(empirical_functional(lam, WIDE_X) - 2.0) < 1e-12  # trace identity
    zero_f = TestFunction("zero", lambda x: np.zeros_like(x), ("window", 0, 1))
    assert empirical_functional(lam, zero_f) == 0.0
    assert abs(empirical_functional(lam, WIDE_X2) - (6.0 - 2.0 / 8.0)) < 1e-12
    with pytest.raises(InvalidParameterError):
        empirical_functional([], WIDE_X)


def test_trace_identity_random_hermitian():
    rng = np.random.default_rng(12)
    for n in (13, 37, 64):
        poly = random_trig_polynomial(rng, d=1, r=2, degree=2, hermitian=True)
        lam = spectrum(toeplitz(poly, n), "lambda")
        expect = np.trace(poly.coefficient((0,))).real / 2.0
        assert abs(empirical_functional(lam, WIDE_X) - expect) < 1e-12


def test_symbol_functional_examples():
    assert abs(symbol_functional(LAP, WIDE_X, "lambda") - 2.0) < 1e-10
    assert abs(symbol_functional(LAP, WIDE_X2, "lambda") - 6.0) < 1e-10
    a = CoefficientFunction.from_scalar(1, lambda x: x)
    kappa = SymbolProduct(a, LAP)
    assert abs(symbol_functional(kappa, WIDE_X, "sigma") - 1.0) < 1e-8


def test_sigma_unitary_invariance():
    rng = np.random.default_rng(21)
    a = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    u = random_reflection(12, rng)
    v = random_reflection(12, rng)
    sv = spectrum(a, "sigma")
    sv2 = spectrum(u @ a @ v, "sigma")
    assert np.abs(sv - sv2).max() < 1e-10


def test_distribution_check_trace_identity_zero_error():
    report = distribution_check(
        lambda n: toeplitz(LAP, n), LAP, [16, 32, 64], mode="lambda",
        basket=[WIDE_X],
    )
    for _, err in report.errors_for("x"):
        assert err < 1e-12
    assert report.passed


def test_distribution_check_exact_error_law():
    report = distribution_check(
        lambda n: toeplitz(LAP, n), LAP, [64, 128, 256], mode="lambda",
        basket=[WIDE_X2], tolerance=0.05, quad_tol=1e-10,
    )
    for (d_n, err), n in zip(report.errors_for("x^2"), (64, 128, 256)):
        assert d_n == n
        assert abs(err - 2.0 / n) <= 1e-12
    assert report.passed


def test_distribution_check_lambda_requires_hermitian():
    shift = TrigPolynomial(1, 1, {(1,): [[1.0]]})
    with pytest.raises(ModeError):
        distribution_check(lambda n: toeplitz(shift, n), shift, [8, 16], mode="lambda")
    # the waiver path runs (verdict may be anything sensible)
    distribution_check(
        lambda n: toeplitz(shift, n), shift, [8, 16], mode="sigma",
    )


def test_distribution_check_basket_filter():
    with pytest.raises(InvalidParameterError):
        distribution_check(
            lambda n: toeplitz(LAP, n), LAP, [8, 16], mode="lambda",
            basket_ids=["nope"],
        )


def test_distribution_report_csv_header():
    import io

    report = distribution_check(
        lambda n: toeplitz(LAP, n), LAP, [8, 16], mode="lambda", basket=[WIDE_X],
    )
    buf = io.StringIO()
    report.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,d_n,mode,F_id,empirical,symbol,abs_error"
    assert len(lines) == 1 + 2


def test_quantile_compare_matched_grid():
    # feeding back the symbol's own grid samples gives deviation zero
    n = 64
    theta = -np.pi + np.arange(1, n + 1) * (2 * np.pi / n)
    values = np.sort(2.0 - 2.0 * np.cos(theta))
    assert quantile_compare(values, LAP, n, outlier_budget=0.0) < 1e-14


def test_quantile_compare_constant_symbol():
    c = ConstantSymbol(1, np.array([[5.0]]))
    values = np.full(32, 5.0)
    assert quantile_compare(values, c, 32) == 0.0


def test_quantile_compare_converges_for_laplacian():
    lam = spectrum(toeplitz(LAP, 256), "lambda")
    dev = quantile_compare(lam, LAP, 256)
    assert dev < 0.05


def test_quantile_compare_budget_validation():
    with pytest.raises(InvalidParameterError):
        quantile_compare(np.ones(8), LAP, 8, outlier_budget=0.6)


def test_range_check_examples():
    values = np.concatenate([spectrum(toeplitz(LAP, n), "lambda") for n in (32, 64, 128)])
    res = range_check(values, LAP, tol=0.05, mode="lambda")
    assert res.passed

    c5 = ConstantSymbol(1, np.array([[5.0]]))
    assert range_check(np.full(16, 5.0), c5, tol=0.01).passed
    bad = range_check(np.zeros(16), c5, tol=0.1)
    assert not bad.passed
    assert bad.max_excess > 4.5
    assert bad.violations


def test_range_check_complex_hull():
    sym = ConstantSymbol(1, np.array([[1j]]))
    vals = np.array([1j, 0.99j, 1.01j])
    assert range_check(vals, sym, tol=0.05, mode="lambda").passed
    far = ConstantSymbol(1, np.array([[5 + 5j]]))
    assert not range_check(vals, far, tol=0.1, mode="lambda").passed


def test_default_basket_structure():
    basket = default_basket(0.0, 4.0)
    ids = [f.id for f in basket]
    assert ids == ["x", "x^2", "x^3", "bump_lo", "bump_hi"]
    bump = basket[3]
    assert bump.evaluate(np.array([100.0]))[0] == 0.0


def test_trend_helpers():
    assert non_increasing([1.0, 0.9, 0.5])
    assert non_increasing([1.0, 1.4], slack=1.5)
    assert not non_increasing([1.0, 1.6], slack=1.5)
    assert trending_to_zero([1.0, 0.5, 0.2])
    assert not trending_to_zero([1.0, 1.0, 1.0])
    assert trending_to_zero([0.0, 0.0])
    assert not trending_to_zero([1.0, 0.2, 0.9])


def test_symbol_functional_quadrature_error():
    from gltlab.errors import QuadratureError

    bump = cosine_bump(2.0, 1.0)
    with pytest.raises(QuadratureError):
        symbol_functional(LAP, bump, "lambda", grid_points_per_dim=64, max_nodes=32)


def test_empirical_functional_rejects_non_finite():
    from gltlab.errors import EvaluationError

    with pytest.raises(EvaluationError):
        empirical_functional([1.0, np.inf], WIDE_X)


def test_poly_window_clips():
    f = poly_on_window(2, 0.0, 1.0)
    assert f.evaluate(np.array([2.0]))[0] == 0.0
    assert f.evaluate(np.array([0.5]))[0] == 0.25
    b = cosine_bump(0.0, 1.0)
    assert b.evaluate(np.array([0.0]))[0] == 1.0
    assert b.evaluate(np.array([1.0]))[0] < 1e-15
