import numpy as np
import pytest

from aloe_lab.problems import (DimensionMismatchError, ProblemInstance,
                               finite_difference_gradient, make_linear,
                               make_strongly_convex_quadratic,
                               make_synthetic_logistic)


@pytest.fixture(scope="module")
def quadratic():
    return make_strongly_convex_quadratic(dim=10, lambda_min=0.1,
                                          lambda_max=10.0, seed=7)


@pytest.fixture(scope="module")
def logistic():
    return make_synthetic_logistic(n_samples=64, dim=5, seed=3)


class TestQuadratic:
    def test_minimum_at_origin(self, quadratic):
        assert quadratic.value(np.zeros(10)) == 0.0
        assert quadratic.phi_star == 0.0
        np.testing.assert_allclose(quadratic.gradient(np.zeros(10)), 0.0)

    def test_values_nonnegative(self, quadratic):
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert quadratic.value(rng.standard_normal(10)) >= 0.0

    def test_spectrum_constants(self, quadratic):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = rng.standard_normal(10)
            y = rng.standard_normal(10)
            gap = quadratic.gradient(x) - quadratic.gradient(y)
            dx = x - y
            # Lipschitz gradient with L = lambda_max
            assert np.linalg.norm(gap) <= quadratic.lipschitz_L * np.linalg.norm(dx) * (1 + 1e-12)
            # strong convexity with beta = lambda_min
            assert gap @ dx >= quadratic.strong_convexity_beta * dx @ dx * (1 - 1e-12)

    def test_pl_inequality(self, quadratic):
        rng = np.random.default_rng(2)
        beta = quadratic.strong_convexity_beta
        for _ in range(50):
            x = rng.standard_normal(10)
            g = quadratic.gradient(x)
            assert g @ g >= 2 * beta * (quadratic.value(x) - quadratic.phi_star) * (1 - 1e-12)

    def test_x0_norm_control(self):
        p = make_strongly_convex_quadratic(dim=4, lambda_min=1.0,
                                           lambda_max=2.0, seed=0, x0_norm=5.0)
        assert np.linalg.norm(p.x0) == pytest.approx(5.0)

    def test_explicit_x0(self):
        x0 = np.array([1.0, 2.0])
        p = make_strongly_convex_quadratic(dim=2, lambda_min=1.0,
                                           lambda_max=1.0, seed=0, x0=x0)
        np.testing.assert_array_equal(p.x0, x0)
        # lambda_min == lambda_max == 1 gives the identity matrix
        assert p.value(x0) == pytest.approx(2.5)

    def test_bad_spectrum_rejected(self):
        with pytest.raises(ValueError):
            make_strongly_convex_quadratic(dim=2, lambda_min=0.0,
                                           lambda_max=1.0, seed=0)
        with pytest.raises(ValueError):
            make_strongly_convex_quadratic(dim=2, lambda_min=2.0,
                                           lambda_max=1.0, seed=0)


class TestGradientConsistency:
    def test_quadratic_matches_finite_differences(self, quadratic):
        rng = np.random.default_rng(5)
        for _ in range(100):
            x = rng.standard_normal(10)
            fd = finite_difference_gradient(quadratic, x, h=1e-6)
            g = quadratic.gradient(x)
            assert np.linalg.norm(fd - g) <= 1e-4 * max(1.0, np.linalg.norm(g))

    def test_logistic_matches_finite_differences(self, logistic):
        problem, _ = logistic
        rng = np.random.default_rng(6)
        for _ in range(100):
            x = rng.standard_normal(problem.dim)
            fd = finite_difference_gradient(problem, x, h=1e-6)
            g = problem.gradient(x)
            assert np.linalg.norm(fd - g) <= 1e-4 * max(1.0, np.linalg.norm(g))


class TestProblemInstance:
    def test_dimension_mismatch(self, quadratic):
        with pytest.raises(DimensionMismatchError):
            quadratic.value(np.zeros(3))
        with pytest.raises(DimensionMismatchError):
            quadratic.gradient(np.zeros(11))

    def test_with_class_tag(self, quadratic):
        p = quadratic.with_class_tag("nonconvex")
        assert p.class_tag == "nonconvex"
        assert quadratic.class_tag == "strongly_convex"

    def test_unknown_class_tag_rejected(self, quadratic):
        with pytest.raises(ValueError):
            quadratic.with_class_tag("mystery")


class TestLogistic:
    def test_phi_star_is_minimum(self, logistic):
        problem, _ = logistic
        rng = np.random.default_rng(9)
        for _ in range(20):
            x = rng.standard_normal(problem.dim)
            assert problem.value(x) >= problem.phi_star - 1e-10

    def test_strong_convexity_from_regularizer(self, logistic):
        problem, dataset = logistic
        assert problem.strong_convexity_beta == dataset.reg

    def test_full_data_mean_equals_value(self, logistic):
        problem, dataset = logistic
        rng = np.random.default_rng(11)
        x = rng.standard_normal(problem.dim)
        idx = np.arange(dataset.n_samples)
        mean_loss = float(np.add.reduce(dataset.losses(x, idx)) / dataset.n_samples)
        assert mean_loss == problem.value(x)  # bit-for-bit

    def test_per_sample_loss_accessors(self, logistic):
        problem, dataset = logistic
        x = np.zeros(problem.dim)
        assert dataset.loss(x, 0) == pytest.approx(np.log(2), rel=1e-12)
        np.testing.assert_allclose(dataset.loss_grad(x, 3),
                                   dataset.loss_grads(x, np.array([3]))[0])

    def test_growth_constants_positive(self, logistic):
        _, dataset = logistic
        assert dataset.M_c > 0
        assert dataset.M_v > 0

    def test_diameter_positive(self, logistic):
        problem, _ = logistic
        assert problem.diameter_D > 0


class TestLinear:
    def test_gradient_is_constant(self):
        c = np.array([1.0, -2.0, 3.0])
        p = make_linear(c)
        rng = np.random.default_rng(4)
        for _ in range(5):
            np.testing.assert_array_equal(p.gradient(rng.standard_normal(3)), c)

    def test_value(self):
        p = make_linear(np.array([2.0, 0.0]))
        assert p.value(np.array([3.0, 7.0])) == 6.0
