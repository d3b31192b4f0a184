import math
import warnings

import numpy as np
import pytest

from affdim.cone_validate import gamma_hull
from affdim.series import eval_poly
from affdim.spectral import (SpectralWarning, adaptive_lambda1, dominant_eig, order_ladder,
                             spectral_gap_estimate)
from affdim.transfer import assemble_operator

from conftest import (RHO_SYM, doubling_decays, golden_pair, near_diagonal_pair,
                      random_positive_system, scalar_pair, single_map, standard_two_map)


def test_dominant_eig_scalar():
    c = 2 * (1 / 3) ** 0.5
    res = dominant_eig(c * np.eye(4))
    assert res.lambda1 == pytest.approx(2 / math.sqrt(3), rel=1e-15)
    assert res.lambda1 == pytest.approx(1.1547005, abs=1e-7)
    assert res.iterations == 1


def test_dominant_eig_diag():
    res = dominant_eig(np.diag([3.0, 1.0]))
    assert res.lambda1 == pytest.approx(3.0, rel=1e-14)
    r = res.right_vec / np.linalg.norm(res.right_vec)
    assert abs(r[0]) == pytest.approx(1.0, abs=1e-12)


def test_dominant_eig_random_positive(rng):
    for _ in range(20):
        M = rng.uniform(0.01, 1, (5, 5))
        oracle = max(np.linalg.eigvals(M), key=abs).real
        res = dominant_eig(M)
        assert res.lambda1 == pytest.approx(oracle, abs=1e-10)
        assert np.allclose(M @ res.right_vec, res.lambda1 * res.right_vec, atol=1e-12)
        assert np.allclose(M.T @ res.left_vec, res.lambda1 * res.left_vec, atol=1e-12)
        assert dominant_eig(M.T).lambda1 == pytest.approx(res.lambda1, abs=1e-12)


def test_dominant_eig_transpose_on_operators():
    for sysm in (standard_two_map(), golden_pair()):
        M = assemble_operator(sysm, 0.7, 32).entries
        assert dominant_eig(M.T).lambda1 == pytest.approx(dominant_eig(M).lambda1, abs=1e-12)


def test_dominant_eig_rejects():
    with pytest.raises(ValueError):
        dominant_eig(np.ones((2, 3)))
    with pytest.raises(ValueError):
        dominant_eig(np.array([[np.nan]]))


def test_dominant_eig_nonconvergence_flagged():
    # rotation: no dominant eigenvalue, the iteration cycles
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    with pytest.warns(SpectralWarning):
        res = dominant_eig(R, max_iter=50)
    assert not res.converged
    assert "non_converged" in res.flags


def test_gap_examples():
    M = 0.4 * np.eye(5)
    assert spectral_gap_estimate(M, dominant_eig(M)) == pytest.approx(1.0, abs=1e-12)
    D = np.diag([3.0, 1.0])
    assert spectral_gap_estimate(D, dominant_eig(D)) == pytest.approx(1 / 3, rel=1e-8)


def test_gap_against_dense_oracle():
    M = assemble_operator(standard_two_map(), 0.7, 32).entries
    ev = sorted(np.abs(np.linalg.eigvals(M)), reverse=True)
    gap = spectral_gap_estimate(M, dominant_eig(M))
    assert gap < 1
    assert gap == pytest.approx(ev[1] / ev[0], rel=1e-6)


def test_order_ladder():
    assert order_ladder(64) == [8, 16, 32, 64]
    assert order_ladder(100) == [8, 16, 32, 64]
    assert order_ladder(4) == []


def test_adaptive_scalar_pair_at_similarity_dimension():
    s = math.log(2) / math.log(3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SpectralWarning)
        res = adaptive_lambda1(scalar_pair(), s)
    assert res.lambda1 == pytest.approx(2 * (1 / 3) ** s, abs=1e-15)
    assert res.lambda1 == pytest.approx(1.0, abs=1e-15)
    assert "degenerate_gap" in res.flags


def test_adaptive_single_map_high_branch():
    s = 1.5
    oracle = RHO_SYM ** (2 - s) * 0.05 ** (s - 1)
    res = adaptive_lambda1(single_map(), s)
    assert res.lambda1 == pytest.approx(oracle, abs=1e-10)
    assert oracle == pytest.approx(0.1344997, abs=1e-7)


def test_adaptive_flags_unconverged_ladder():
    with pytest.warns(SpectralWarning):
        res = adaptive_lambda1(near_diagonal_pair(), 0.5, tol=1e-30, max_order=32)
    assert "truncation_not_converged" in res.flags
    assert not res.converged
    assert res.order_used == 32


def fixtures(seed=11):
    rng = np.random.default_rng(seed)
    return [standard_two_map(), golden_pair(), near_diagonal_pair()] + \
        [random_positive_system(rng) for _ in range(3)]


@pytest.mark.parametrize("sysm", fixtures(), ids=lambda s: s.label or "random")
@pytest.mark.parametrize("s", [0.3, 0.7, 1.3, 1.7])
def test_eigenfunction_positive_and_gap(sysm, s):
    hull = gamma_hull(sysm)
    res = adaptive_lambda1(sysm, s, hull=hull.interval)
    assert res.gap < 1
    xs = 2 * (hull.grid(100) - 0.5)
    h = eval_poly(res.right_vec, xs)
    assert np.all(np.real(h) > 0)
    # normalised to one at the hull midpoint
    assert eval_poly(res.right_vec, 2 * (0.5 * (hull.lo + hull.hi) - 0.5)) == pytest.approx(1.0)


@pytest.mark.parametrize("sysm", fixtures(), ids=lambda s: s.label or "random")
@pytest.mark.parametrize("s", [0.3, 1.7])
def test_truncation_error_decays(sysm, s):
    lam = {N: dominant_eig(assemble_operator(sysm, s, N).entries).lambda1
           for N in (8, 16, 32, 64, 128)}
    errs = [abs(lam[2 * N] - lam[N]) for N in (8, 16, 32, 64)]
    assert doubling_decays(errs, lam[128])
    assert errs[-1] <= 1e-13


def test_doubling_decays_helper():
    assert doubling_decays([1e-3, 2e-4, 1e-5], 1.0)
    assert not doubling_decays([1e-3, 5e-4], 1.0)
    assert doubling_decays([1e-15, 1e-15, 0.0], 1.0)
