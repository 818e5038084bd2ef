import io

import numpy as np
import pytest

from helpers import random_reflection

from gltlab.acs import (
    ZERO_SEQUENCES,
    acs_check,
    constant_s_model,
    designed_model,
    deterministic_model,
    hoeffding_radius,
    identity_sequence,
    optimal_splitting,
    rank_one_sequence,
    sacs_check,
    spike_sequence,
    splitting_distance,
    zero_distribution_test,
)
from gltlab.errors import InvalidParameterError
from gltlab.matgen import toeplitz
from gltlab.symbols import TrigPolynomial


def test_splitting_distance_examples():
    assert splitting_distance(np.zeros((5, 5))) == 0.0
    assert abs(splitting_distance(np.eye(7)) - 1.0) < 1e-15
    m = np.zeros((10, 10))
    m[0, 0] = 5.0
    assert abs(splitting_distance(m) - 0.1) < 1e-15


def test_splitting_upper_bounds():
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = rng.standard_normal((8, 8))
        p = splitting_distance(a)
        assert p <= min(1.0, np.linalg.norm(a, 2)) + 1e-12


def test_splitting_unitary_invariance():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    u = random_reflection(10, rng)
    v = random_reflection(10, rng)
    assert abs(splitting_distance(a) - splitting_distance(u @ a @ v)) < 1e-10


def test_splitting_subadditive():
    rng = np.random.default_rng(6)
    for _ in range(10):
        a = rng.standard_normal((9, 9))
        b = rng.standard_normal((9, 9))
        assert splitting_distance(a + b) <= (
            splitting_distance(a) + splitting_distance(b) + 1e-10
        )


def test_optimal_splitting_reconstruction():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((12, 12))
    a[:, 0] *= 40.0  # make a rank trade attractive
    split = optimal_splitting(a)
    assert np.abs(split.rank_part + split.norm_part - a).max() < 1e-10
    assert abs(split.rank_fraction + split.norm - splitting_distance(a)) < 1e-10
    sv = np.linalg.svd(split.rank_part, compute_uv=False)
    assert int(np.sum(sv > 1e-9)) == split.rank


def _band_poly(nmax, decay=lambda k: 1.0 / (1.0 + k * k)):
    return TrigPolynomial(
        1, 1, {(k,): [[decay(abs(k))]] for k in range(-(nmax - 1), nmax)}
    )


def test_acs_family_equal_target_passes():
    target = lambda n: toeplitz(_band_poly(n[0]), n)
    family = lambda m, n: target(n)
    cert = acs_check(family, target, [1, 2, 4], [(16,), (32,)])
    assert cert.passed
    assert all(cert.c[m] == 0.0 for m in cert.m_list)
    assert all(cert.omega[m] <= 1e-12 for m in cert.m_list)


def test_acs_truncation_family():
    target = lambda n: toeplitz(_band_poly(n[0]), n)
    family = lambda m, n: toeplitz(_band_poly(n[0]).truncated(m), n)
    cert = acs_check(family, target, [1, 2, 4, 8], [(32,), (64,)])
    assert cert.passed
    tails = {m: 2 * sum(1.0 / (1 + k * k) for k in range(m + 1, 100000)) for m in cert.m_list}
    for m in cert.m_list:
        assert cert.c[m] == 0.0
        assert cert.omega[m] <= tails[m]


def test_acs_constant_offset_fails():
    target = lambda n: toeplitz(_band_poly(n[0]), n)
    family = lambda m, n: target(n).data + np.eye(n[0])
    cert = acs_check(family, target, [1, 2, 4], [(16,), (32,)])
    assert not cert.passed
    assert all(abs(cert.omega[m] - 1.0) < 1e-12 for m in cert.m_list)


def test_acs_size_mismatch():
    target = lambda n: np.eye(n[0])
    family = lambda m, n: np.eye(n[0] + 1)
    with pytest.raises(InvalidParameterError):
        acs_check(family, target, [1], [(4,), (8,)])


def test_certificate_csv_header():
    target = lambda n: toeplitz(_band_poly(n[0]), n)
    cert = acs_check(lambda m, n: target(n), target, [1, 2], [(8,), (16,)])
    buf = io.StringIO()
    cert.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "m,n,d_n,rank_frac,norm_part,freq_rank,freq_norm,freq_S,verdict"
    assert len(lines) == 1 + 4


@pytest.mark.parametrize("p", [1, 2, np.inf])
def test_zero_distribution_suite(p):
    sizes = [(64,), (128,), (256,)]
    assert zero_distribution_test(spike_sequence(), p, sizes).passed
    assert not zero_distribution_test(identity_sequence(), p, sizes).passed
    assert zero_distribution_test(rank_one_sequence(), p, sizes).passed


def test_zero_distribution_values():
    res = zero_distribution_test(rank_one_sequence(), 1, [(16,), (32,)])
    assert np.allclose(res.normalized_norms, [1 / 16, 1 / 32])
    res_i = zero_distribution_test(identity_sequence(), 2, [(16,), (32,)])
    assert np.allclose(res_i.normalized_norms, [1.0, 1.0])
    assert not res_i.norm_criterion and not res_i.splitting_criterion


def test_zero_distribution_bounded_norm_vanishing_rank_suite():
    # rank fraction 1/sqrt(d_n) -> 0 with spectral norm identically 1: the
    # splitting criterion certifies it even though no p-norm vanishes
    def seq(n):
        d_n = n[0]
        k = int(np.ceil(np.sqrt(d_n)))
        rng = np.random.default_rng(d_n)  # deterministic per size
        u, _ = np.linalg.qr(rng.standard_normal((d_n, k)))
        return u @ u.T

    res = zero_distribution_test(seq, np.inf, [(64,), (128,), (256,)])
    assert res.passed
    assert res.splitting_criterion and not res.norm_criterion
    assert np.allclose(res.normalized_norms, 1.0)


def test_zero_distribution_invalid_p():
    with pytest.raises(InvalidParameterError):
        zero_distribution_test(identity_sequence(), 0.3, [(8,), (16,)])


def test_sacs_deterministic_model():
    cert = sacs_check(deterministic_model(1), [2, 4, 8], [(12,), (16,)], trials=200)
    assert cert.passed
    for row in cert.rows:
        assert row.freq_rank == 1.0
        assert row.freq_norm == 1.0
        assert row.freq_s == 0.0


def test_sacs_designed_model_estimates():
    cert = sacs_check(designed_model(99), [2, 4], [(12,), (16,)], trials=2000)
    assert cert.passed
    for m in (2, 4):
        assert abs(cert.s[m] - 1.0 / m) < 0.05


def test_sacs_constant_s_fails():
    cert = sacs_check(constant_s_model(5), [2, 4, 8], [(12,), (16,)], trials=300)
    assert not cert.passed


def test_sacs_bit_reproducible():
    out = []
    for _ in range(2):
        cert = sacs_check(designed_model(42), [2, 4], [(10,), (12,)], trials=300)
        buf = io.StringIO()
        cert.write_csv(buf)
        out.append(buf.getvalue())
    assert out[0] == out[1]


def test_sacs_requires_trials():
    with pytest.raises(InvalidParameterError):
        sacs_check(deterministic_model(1), [2], [(8,), (12,)], trials=10)


def test_hoeffding_radius_value():
    assert abs(hoeffding_radius(10000) - np.sqrt(np.log(20.0) / 20000.0)) < 1e-15


def test_zero_sequences_registry():
    assert set(ZERO_SEQUENCES) == {"spike", "identity", "rankone"}
