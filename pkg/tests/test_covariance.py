import math

import numpy as np
import pytest

from conftest import random_spd
from oracles import cofactor_det, jittered, kron_all, loop_empirical_sigma2, sqe_loop
from tvgp.covariance import (
    Sigma3Params,
    SpdMatrix,
    SqeKernelParams,
    build_sigma3,
    build_sqe_matrix,
    empirical_sigma2,
    empirical_sigma2_matrix,
    whiten,
)
from tvgp.errors import DomainError, FactorizationError, ShapeError
from tvgp.tensor import DenseTensor, frobenius_norm_sq, vectorize


class TestSpdMatrix:
    def test_reconstructs_entries(self, rng):
        a = random_spd(rng, 4)
        f = SpdMatrix.factorize(a)
        np.testing.assert_allclose(f.chol @ f.chol.T, f.entries, rtol=1e-10)
        np.testing.assert_allclose(f.raw, a, rtol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_logdet_matches_cofactor(self, rng, n):
        for _ in range(10):
            a = random_spd(rng, n)
            f = SpdMatrix.factorize(a)
            assert f.logdet == pytest.approx(math.log(cofactor_det(jittered(a))), rel=1e-10)

    def test_jitter_is_relative(self):
        f = SpdMatrix.factorize(np.diag([2.0, 4.0]))
        assert f.jitter == pytest.approx(3e-8)

    def test_indefinite_names_pivot(self):
        with pytest.raises(FactorizationError) as info:
            SpdMatrix.factorize(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]))
        assert info.value.pivot == 3
        assert "pivot 3" in str(info.value)

    def test_asymmetric_rejected(self):
        with pytest.raises(DomainError):
            SpdMatrix.factorize(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_non_square(self):
        with pytest.raises(ShapeError):
            SpdMatrix.factorize(np.ones((2, 3)))


class TestSqe:
    def test_single_point(self):
        f = build_sqe_matrix([[0.3, 0.1]], SqeKernelParams((2.0, 5.0)))
        assert f.entries.shape == (1, 1)
        assert f.entries[0, 0] == pytest.approx(1.0 + 1e-8, abs=1e-15)

    def test_hand_value(self):
        f = build_sqe_matrix([[0.0, 0.0], [1.0, 0.0]], SqeKernelParams((math.log(2), 1.0)), jitter=0.0)
        assert f.entries[0, 1] == pytest.approx(0.5, rel=1e-14)
        assert f.entries[0, 0] == 1.0

    def test_large_q_gives_identity(self):
        pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
        f = build_sqe_matrix(pts, SqeKernelParams((1e3, 1e3)), jitter=0.0)
        off = f.entries - np.diag(np.diag(f.entries))
        assert np.max(np.abs(off)) < 1e-12

    def test_against_loop(self, rng):
        pts = rng.uniform(0, 1, size=(7, 2))
        q = (3.0, 0.7)
        f = build_sqe_matrix(pts, SqeKernelParams(q), jitter=0.0)
        np.testing.assert_allclose(f.entries, sqe_loop(pts, q), rtol=1e-14)

    def test_permutation_equivariance(self, rng):
        pts = rng.uniform(0, 1, size=(6, 2))
        perm = rng.permutation(6)
        p = SqeKernelParams((2.0, 4.0))
        a = build_sqe_matrix(pts, p).entries
        b = build_sqe_matrix(pts[perm], p).entries
        np.testing.assert_allclose(b, a[np.ix_(perm, perm)], rtol=1e-14)

    def test_duplicate_points_survive_with_jitter(self):
        f = build_sqe_matrix([[0.5, 0.5], [0.5, 0.5]], SqeKernelParams((1.0, 1.0)))
        assert np.isfinite(f.logdet)

    def test_duplicate_points_without_jitter_fail(self):
        with pytest.raises(FactorizationError):
            build_sqe_matrix([[0.5, 0.5], [0.5, 0.5]], SqeKernelParams((1.0, 1.0)), jitter=0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            build_sqe_matrix([[0.0, 0.0, 0.0]], SqeKernelParams((1.0, 1.0)))

    @pytest.mark.parametrize("q", [(0.0, 1.0), (-1.0, 1.0), (float("nan"), 1.0)])
    def test_bad_q(self, q):
        with pytest.raises(DomainError):
            SqeKernelParams(q)


class TestEmpiricalSigma2:
    def test_constant_along_mode1_is_zero(self, rng):
        row = rng.standard_normal((1, 3, 2))
        d = DenseTensor(np.repeat(row, 4, axis=0))
        np.testing.assert_allclose(empirical_sigma2_matrix(d), 0.0, atol=1e-15)

    def test_identical_slices(self, rng):
        arr = rng.standard_normal((5, 1, 3))
        d = DenseTensor(np.concatenate([arr, arr], axis=1))
        e = empirical_sigma2_matrix(d)
        assert e[0, 0] == pytest.approx(e[0, 1], rel=1e-13)
        assert e[1, 1] == pytest.approx(e[0, 1], rel=1e-13)

    def test_against_loop(self, rng):
        arr = rng.standard_normal((4, 3, 2))
        np.testing.assert_allclose(empirical_sigma2_matrix(DenseTensor(arr)), loop_empirical_sigma2(arr),
                                   rtol=1e-12, atol=1e-12)

    def test_invariant_under_mode1_constant(self, rng):
        arr = rng.standard_normal((5, 3, 2))
        shift = np.repeat(rng.standard_normal((1, 3, 2)), 5, axis=0)
        a = empirical_sigma2_matrix(DenseTensor(arr))
        b = empirical_sigma2_matrix(DenseTensor(arr + shift))
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_symmetric(self, rng):
        e = empirical_sigma2_matrix(DenseTensor(rng.standard_normal((6, 4, 3))))
        np.testing.assert_array_equal(e, e.T)

    def test_needs_two_columns(self):
        with pytest.raises(DomainError):
            empirical_sigma2(DenseTensor(np.ones((3, 2, 1))))

    def test_needs_rank_three(self):
        with pytest.raises(ShapeError):
            empirical_sigma2(DenseTensor(np.ones((3, 2))))


class TestSigma3:
    def test_identity(self):
        f = build_sigma3(Sigma3Params(1.0, 1.0, 0.0), jitter=0.0)
        np.testing.assert_array_equal(f.entries, np.eye(2))

    def test_off_diagonal(self):
        f = build_sigma3(Sigma3Params(4.0, 1.0, 0.5), jitter=0.0)
        assert f.entries[0, 1] == pytest.approx(1.0, rel=1e-15)

    def test_near_singular(self):
        rho = 0.999999
        f = build_sigma3(Sigma3Params(1.0, 1.0, rho))
        eps = 1e-8
        assert f.logdet == pytest.approx(math.log((1 + eps) ** 2 - rho**2), rel=1e-8)
        # jitter is about 1% of 1 - rho**2 at this correlation
        assert f.logdet == pytest.approx(math.log(1 - rho**2), rel=1e-2)

    @pytest.mark.parametrize("p", [(1.0, 1.0, 1.0), (1.0, 1.0, -1.2), (0.0, 1.0, 0.0), (1.0, -2.0, 0.0)])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            build_sigma3(Sigma3Params(*p))


class TestWhiten:
    def test_identity_factors(self, rng):
        t = DenseTensor(rng.standard_normal((2, 3, 2)))
        assert whiten(t, [SpdMatrix.identity(n) for n in t.dims]) == t

    def test_quadratic_form_against_dense_inverse(self, rng):
        for _ in range(20):
            t = DenseTensor(rng.standard_normal((2, 2, 2)))
            covs = [random_spd(rng, 2) for _ in range(3)]
            factors = [SpdMatrix.factorize(c, jitter=0.0) for c in covs]
            v = vectorize(t)
            expected = v @ np.linalg.solve(kron_all(covs), v)
            assert frobenius_norm_sq(whiten(t, factors)) == pytest.approx(expected, rel=1e-10)

    def test_order_mismatch(self):
        with pytest.raises(ShapeError):
            whiten(DenseTensor(np.zeros((2, 3))), [SpdMatrix.identity(2), SpdMatrix.identity(2)])
