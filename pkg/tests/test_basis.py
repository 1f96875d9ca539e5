"""Clamped cubic B-spline construction against a de Boor recursion oracle."""

import numpy as np
import pytest

from bfosr.basis import DEGREE, eval_basis, make_basis
from bfosr.errors import InvalidDimensionError, InvalidRangeError, OutOfDomainError

from oracles import deboor_matrix


class TestKnots:
    def test_clamped_multiplicity(self):
        basis = make_basis(8, 2020.0, 2090.0, 0.01)
        assert basis.knots.size == 8 + DEGREE + 1
        np.testing.assert_array_equal(basis.knots[:4], 2020.0)
        np.testing.assert_array_equal(basis.knots[-4:], 2090.0)

    def test_interior_knots_equally_spaced(self):
        basis = make_basis(10, 0.0, 1.0, 0.5)
        interior = basis.knots[4:-4]
        assert interior.size == 10 - DEGREE - 1
        np.testing.assert_allclose(np.diff(interior), np.diff(interior)[0])
        # interior knots subdivide the domain together with the endpoints
        full = np.concatenate([[0.0], interior, [1.0]])
        np.testing.assert_allclose(full, np.linspace(0.0, 1.0, interior.size + 2))

    def test_minimal_size_has_no_interior_knots(self):
        basis = make_basis(4, -1.0, 1.0, 1.0)
        assert basis.knots[4:-4].size == 0


class TestEvaluation:
    def test_matches_de_boor_recursion(self):
        rng = np.random.default_rng(42)
        for K in (4, 5, 8, 13):
            basis = make_basis(K, 2020.0, 2090.0, 0.01)
            t = np.sort(rng.uniform(2020.0, 2090.0, size=60))
            t[0], t[-1] = 2020.0, 2090.0
            got = eval_basis(basis, t)
            want = deboor_matrix(t, basis.knots, DEGREE)
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_partition_of_unity(self):
        rng = np.random.default_rng(7)
        basis = make_basis(9, 0.0, 10.0, 0.01)
        t = rng.uniform(0.0, 10.0, size=1000)
        theta = eval_basis(basis, t)
        np.testing.assert_allclose(theta.sum(axis=1), 1.0, atol=1e-10)
        assert np.all(theta >= 0)

    def test_endpoint_rows_are_unit_vectors(self):
        basis = make_basis(7, 2020.0, 2090.0, 0.01)
        theta = eval_basis(basis, np.array([2020.0, 2090.0]))
        want = np.zeros((2, 7))
        want[0, 0] = 1.0
        want[1, -1] = 1.0
        np.testing.assert_allclose(theta, want, atol=1e-14)

    def test_reference_values_midpoint_k4(self):
        # with no interior knots the cubic basis at the midpoint is the
        # Bernstein row (1/8, 3/8, 3/8, 1/8)
        basis = make_basis(4, 0.0, 1.0, 1.0)
        theta = eval_basis(basis, np.array([0.5]))
        np.testing.assert_allclose(theta[0], [0.125, 0.375, 0.375, 0.125], atol=1e-14)

    def test_local_support(self):
        basis = make_basis(12, 0.0, 1.0, 0.01)
        t = np.linspace(0.0, 1.0, 400)
        theta = eval_basis(basis, t)
        for k in range(12):
            lo, hi = basis.knots[k], basis.knots[k + DEGREE + 1]
            outside = (t < lo) | (t > hi)
            assert np.all(theta[outside, k] == 0.0)

    def test_design_full_rank_on_distinct_points(self):
        basis = make_basis(8, 2020.0, 2090.0, 0.01)
        t = np.linspace(2020.0, 2090.0, 8)
        assert np.linalg.matrix_rank(eval_basis(basis, t)) == 8

    def test_out_of_domain_raises(self):
        basis = make_basis(5, 0.0, 1.0, 0.01)
        with pytest.raises(OutOfDomainError):
            eval_basis(basis, np.array([0.5, 1.0000001]))
        with pytest.raises(OutOfDomainError):
            eval_basis(basis, np.array([-0.1]))


class TestPenalty:
    def test_blend_formula(self):
        basis = make_basis(8, 0.0, 1.0, 0.3)
        np.testing.assert_allclose(
            basis.P, 0.3 * np.eye(8) + 0.7 * basis.P2, atol=1e-14
        )
        np.testing.assert_array_equal(basis.P0, np.eye(8))

    def test_second_difference_gram_rank(self):
        for K in (4, 6, 8, 11):
            basis = make_basis(K, 0.0, 1.0, 0.01)
            assert np.linalg.matrix_rank(basis.P2) == K - 2
            # constants and linear-in-index score vectors span the null space
            null = np.stack([np.ones(K), np.arange(K, dtype=float)], axis=1)
            np.testing.assert_allclose(basis.P2 @ null, 0.0, atol=1e-12)

    @pytest.mark.parametrize("alpha", [0.001, 0.01, 1.0])
    def test_blend_positive_definite(self, alpha):
        basis = make_basis(8, 2020.0, 2090.0, alpha)
        eigs = np.linalg.eigvalsh(basis.P)
        assert eigs.min() > 0
        np.testing.assert_allclose(basis.P, basis.P.T, atol=1e-15)

    def test_alpha_one_is_identity(self):
        basis = make_basis(6, 0.0, 1.0, 1.0)
        np.testing.assert_array_equal(basis.P, np.eye(6))


class TestValidation:
    def test_k_below_four_rejected(self):
        for K in (0, 1, 3):
            with pytest.raises(InvalidDimensionError):
                make_basis(K, 0.0, 1.0, 0.01)

    def test_bad_interval_rejected(self):
        with pytest.raises(InvalidRangeError):
            make_basis(5, 1.0, 1.0, 0.01)
        with pytest.raises(InvalidRangeError):
            make_basis(5, 2.0, 1.0, 0.01)

    def test_alpha_out_of_range_rejected(self):
        for alpha in (0.0, -0.5, 1.5):
            with pytest.raises(InvalidRangeError):
                make_basis(5, 0.0, 1.0, alpha)

    def test_arrays_are_read_only(self):
        basis = make_basis(5, 0.0, 1.0, 0.01)
        with pytest.raises(ValueError):
            basis.P[0, 0] = 99.0
        with pytest.raises(ValueError):
            basis.knots[0] = -1.0
