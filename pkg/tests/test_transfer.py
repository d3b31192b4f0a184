import itertools
import math

import numpy as np
import pytest

from affdim.ifs_model import IfsSystem, Mat2, phi_s, word_product
from affdim.series import eval_poly, series_eval
from affdim.spectral import dominant_eig
from affdim.transfer import (OmegaViolation, assemble_operator, assemble_operator_s_derivative,
                             mobius_data, phi_series, psi_value, weight_series)

from conftest import RHO_SYM, golden_pair, scalar_pair, single_map, standard_two_map


def phi_z(A, z):
    # first coordinate of A (z, 1 - z) after normalising the coordinates to sum to 1
    a, b, c, d = A.entries
    return ((a - b) * z + b) / ((a + c - b - d) * z + b + d)


def w_z(A, z):
    a, b, c, d = A.entries
    return (a + c - b - d) * z + b + d


def sample_points(rng, n=20):
    # points of D = {|z - 1/2| < 1/2}, kept at |x| <= 0.5 so truncated series converge fast
    r = 0.25 * np.sqrt(rng.uniform(0, 1, n))
    t = rng.uniform(0, 2 * np.pi, n)
    return 0.5 + r * np.exp(1j * t)


def test_mobius_identity():
    data = mobius_data(Mat2.identity())
    xs = np.array([0.0, 0.3, -0.2 + 0.4j])
    assert np.allclose(data.w(xs), 1.0)
    assert np.allclose(data.u(xs), xs)


def test_mobius_refuses_bad_weight():
    with pytest.raises(OmegaViolation) as info:
        mobius_data(Mat2(1, -1, -1, 0.5))
    assert info.value.condition == "iii"


def test_mobius_matches_closed_form(rng):
    A = Mat2(0.3, 0.1, 0.1, 0.2)
    data = mobius_data(A)
    for z in sample_points(rng):
        x = 2 * (z - 0.5)
        assert data.w(x) == pytest.approx(w_z(A, z), abs=1e-15)
        assert data.u(x) == pytest.approx(2 * phi_z(A, z) - 1, abs=1e-15)


@pytest.mark.parametrize("A", [Mat2.identity(), Mat2.diag(1 / 3, 1 / 3)])
def test_phi_series_identity_action(A):
    assert np.allclose(phi_series(A, 8).coeffs, np.eye(8)[1], atol=1e-15)


def test_phi_series_pointwise(rng):
    A = Mat2(0.2, 0.05, 0.15, 0.25)
    u = phi_series(A, 64)
    for z in sample_points(rng):
        assert series_eval(u, 2 * (z - 0.5)) == pytest.approx(2 * phi_z(A, z) - 1, abs=1e-13)


def test_phi_series_refuses_disc_escape():
    # w > 0 on D but phi maps part of D outside it
    with pytest.raises(OmegaViolation) as info:
        phi_series(Mat2(1.0, -0.2, 0.1, 1.0), 8)
    assert info.value.condition == "ii"


def test_weight_series_examples():
    psi = weight_series(Mat2.diag(1 / 3, 1 / 3), 0.5, 6)
    assert np.allclose(psi.coeffs, [math.sqrt(1 / 3), 0, 0, 0, 0, 0], atol=1e-15)
    assert psi.coeffs[0] == pytest.approx(0.5773503, abs=1e-7)
    # w(1/2) = (2 + 1 - 1 - 1)/2 + 1 + 1 = 2.5
    w_half = w_z(Mat2(2, 1, 1, 1), 0.5)
    val = series_eval(weight_series(Mat2(2, 1, 1, 1), 0.5, 16), 0.0)
    assert val == pytest.approx(math.sqrt(w_half), rel=1e-15)
    assert val == pytest.approx(1.5811388, abs=1e-7)


def test_weight_series_high_branch(rng):
    A = Mat2(0.3, 0.1, 0.1, 0.2)
    psi = weight_series(A, 1.5, 64)
    for z in sample_points(rng, 5):
        oracle = w_z(A, z) ** 0.5 * abs(A.det) ** 0.5
        assert series_eval(psi, 2 * (z - 0.5)) == pytest.approx(oracle, rel=1e-13)


def test_weight_series_rejects_s():
    with pytest.raises(ValueError):
        weight_series(Mat2.identity(), 2.5, 8)


@pytest.mark.parametrize("s", [0.0, 0.4, 1.0, 1.6, 2.0])
def test_assemble_scalar_pair(s):
    M = assemble_operator(scalar_pair(), s, 12).entries
    assert np.allclose(M, 2 * (1 / 3) ** s * np.eye(12), rtol=1e-14, atol=1e-16)


def test_assemble_single_map_perron():
    M = assemble_operator(single_map(), 0.5, 32).entries
    assert dominant_eig(M).lambda1 == pytest.approx(RHO_SYM ** 0.5, abs=1e-10)
    assert RHO_SYM ** 0.5 == pytest.approx(0.6015010, abs=1e-7)


@pytest.mark.parametrize("s", [0.3, 1.0, 1.7])
def test_column_zero_is_total_weight(s):
    sysm = standard_two_map()
    M = assemble_operator(sysm, s, 16).entries
    total = sum(weight_series(A, s, 16).coeffs for A in sysm.maps)
    assert np.allclose(M[:, 0], total, rtol=1e-14, atol=1e-17)


def test_assemble_columns_pointwise(rng):
    # column k evaluated at x must be sum_A psi_A(x) u_A(x)^k
    sysm = standard_two_map()
    s, N = 0.7, 64
    M = assemble_operator(sysm, s, N).entries
    for z in sample_points(rng, 5):
        x = 2 * (z - 0.5)
        for k in (0, 1, 5):
            oracle = sum(psi_value(A, s, x) * (2 * phi_z(A, z) - 1) ** k for A in sysm.maps)
            assert eval_poly(M[:, k], x) == pytest.approx(oracle, rel=1e-12)


def test_s_derivative_scalar_pair():
    s = 0.8
    dM = assemble_operator_s_derivative(scalar_pair(), s, 10)
    assert np.allclose(dM, 2 * (1 / 3) ** s * math.log(1 / 3) * np.eye(10), rtol=1e-14)


@pytest.mark.parametrize("s", [0.4, 1.6])
def test_s_derivative_finite_difference(s):
    sysm = standard_two_map()
    h, N = 1e-5, 24
    fd = (assemble_operator(sysm, s + h, N).entries - assemble_operator(sysm, s - h, N).entries) / (2 * h)
    dM = assemble_operator_s_derivative(sysm, s, N)
    assert np.linalg.norm(fd - dM) <= 1e-6 * np.linalg.norm(dM)


def test_s_derivative_branches_at_one():
    # at s = 1 both weights equal w_A; the derivatives are (log|det| - log w) w and (log w) w,
    # so they add up to log|det A| * w_A
    sysm = standard_two_map()
    N = 16
    jump = assemble_operator_s_derivative(sysm, 1.0, N, "high") + \
        assemble_operator_s_derivative(sysm, 1.0, N, "low")
    oracle = sum(math.log(abs(A.det)) * assemble_operator(IfsSystem((A,)), 1.0, N).entries
                 for A in sysm.maps)
    assert np.allclose(jump, oracle, rtol=1e-12, atol=1e-16)


def _words(m, n):
    return itertools.product(range(m), repeat=n)


def test_mobius_cocycle(rng):
    sysm = golden_pair()
    zs = sample_points(rng)
    for n in range(1, 6):
        for w in _words(2, n):
            P = word_product(sysm, w)
            got = mobius_data(P).u(2 * (zs - 0.5))
            z = zs.copy()
            for i in reversed(w):
                z = phi_z(sysm.maps[i], z)
            assert np.max(np.abs(got - (2 * z - 1))) <= 1e-12


@pytest.mark.parametrize("s", [0.6, 1.4])
def test_weight_cocycle(rng, s):
    sysm = standard_two_map()
    zs = sample_points(rng)
    xs = 2 * (zs - 0.5)
    for n in range(1, 6):
        for w in _words(2, n):
            series = weight_series(word_product(sysm, w), s, 64)
            got = np.array([series_eval(series, x) for x in xs])
            prod = np.ones_like(zs)
            z = zs.copy()
            for i in reversed(w):
                prod = prod * psi_value(sysm.maps[i], s, 2 * (z - 0.5))
                z = phi_z(sysm.maps[i], z)
            assert np.max(np.abs(got / prod - 1)) <= 1e-10


def test_iterate_identity():
    sysm = standard_two_map()
    s, N = 0.7, 48
    M = assemble_operator(sysm, s, N).entries
    lam = dominant_eig(M).lambda1
    assert dominant_eig(np.linalg.matrix_power(M, 2)).lambda1 == pytest.approx(lam ** 2, rel=1e-12)
    squared = IfsSystem(tuple(word_product(sysm, w) for w in _words(2, 2)))
    lam2 = dominant_eig(assemble_operator(squared, s, N).entries).lambda1
    assert lam2 == pytest.approx(lam ** 2, abs=1e-8)


@pytest.mark.parametrize("s", [0.3, 0.7, 1.3, 1.7])
def test_comparison_ratio_bounded(s):
    from affdim.cone_validate import gamma_hull
    sysm = standard_two_map()
    hull = gamma_hull(sysm)
    xs = 2 * (hull.grid(50) - 0.5)

    def spread(n):
        ratios = []
        for w in _words(2, n):
            P = word_product(sysm, w)
            ratios.append(psi_value(P, s, xs) / phi_s(P, s))
        ratios = np.concatenate(ratios)
        return ratios.max() / ratios.min()

    assert spread(8) <= 1.05 * spread(4)


def test_realness_of_complex_assembly():
    sysm = standard_two_map()
    csys = sysm.with_params(sysm.params.astype(complex).tolist())
    for s in (0.5, 1.5):
        Mc = assemble_operator(csys, complex(s), 32).entries
        Mr = assemble_operator(sysm, s, 32).entries
        assert np.max(np.abs(Mc.imag)) <= 1e-14
        assert np.allclose(Mc.real, Mr, rtol=1e-13, atol=1e-16)
