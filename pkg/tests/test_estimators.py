import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binom_mde.asymptotics import quadratic_approximation_gap
from binom_mde.binomial_model import BinomialModel
from binom_mde.estimators import (EPS, DisparityParams, Method,
                                  NonFiniteObjectiveError, Sample, WeightVector,
                                  cvm_distance, estimate_e, estimate_md,
                                  estimate_ml, likelihood_disparity,
                                  minimize_scalar, rho)
from binom_mde.sampling import (ContaminatedModel, derive_stream,
                                sample_contaminated)
from oracles import naive_cvm, seeded_sample

HALF = 1 / math.sqrt(2)


class TestWeightVector:
    def test_uniform(self):
        w = WeightVector.uniform(16)
        assert np.dot(w.d, w.d) == pytest.approx(1.0, abs=1e-12)
        assert w.delta == pytest.approx(4.0)
        assert w.max_sq == pytest.approx(1 / 16)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            WeightVector(np.ones(4))


class TestSample:
    def test_rejects_out_of_support(self):
        with pytest.raises(ValueError):
            Sample.from_values([0, 11], 10)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Sample.from_values([], 10)

    def test_counts(self):
        s = Sample.from_values([0, 2, 2, 3], 3)
        assert list(s.counts) == [1, 0, 2, 1]


class TestCvmDistance:
    def test_perfect_fit(self):
        s = Sample.from_values([0, 1], 1)
        assert cvm_distance(s, WeightVector([HALF, HALF]), 0.5) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("p", [0.1, 0.4, 0.85])
    def test_all_successes_closed_form(self, p):
        s = Sample.from_values([1, 1], 1)
        assert cvm_distance(s, WeightVector([HALF, HALF]), p) == pytest.approx(2 * (1 - p) ** 2, rel=1e-12)

    def test_naive_double_loop(self):
        s = seeded_sample(10, 20, seed=3)
        w = WeightVector.uniform(20)
        assert cvm_distance(s, w, 0.3) == pytest.approx(naive_cvm(s, w.d, 0.3), rel=1e-12)

    def test_naive_double_loop_nonuniform_weights(self):
        s = seeded_sample(6, 15, seed=4)
        d = np.linspace(1, 2, 15)
        w = WeightVector(d / np.linalg.norm(d))
        for p in (0.2, 0.55):
            assert cvm_distance(s, w, p) == pytest.approx(naive_cvm(s, w.d, p), rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            cvm_distance(Sample.from_values([0, 1, 1], 1), WeightVector([HALF, HALF]), 0.5)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 8), min_size=1, max_size=30), st.floats(1e-3, 1 - 1e-3))
    def test_non_negative(self, xs, p):
        s = Sample.from_values(xs, 8)
        assert cvm_distance(s, WeightVector.uniform(len(xs)), p) >= 0.0


class TestEstimateMd:
    def test_balanced_single_trial(self):
        res = estimate_md(Sample.from_values([0, 1], 1))
        assert res.p_hat == pytest.approx(0.5, abs=1e-9)
        assert res.method is Method.MD
        assert not res.at_boundary

    @pytest.mark.parametrize("xs", [[0, 1, 1], [1, 0, 0, 0, 1], [1] * 7 + [0] * 13])
    def test_single_trial_equals_frequency(self, xs):
        s = Sample.from_values(xs, 1)
        res = estimate_md(s)
        assert res.p_hat == pytest.approx(np.mean(xs), abs=1e-9)
        # grid search oracle
        grid = np.linspace(0.001, 0.999, 999)
        w = WeightVector.uniform(len(xs))
        best = grid[np.argmin([cvm_distance(s, w, p) for p in grid])]
        assert abs(best - res.p_hat) <= 1e-3

    def test_grid_oracle(self, grid_oracles):
        s = seeded_sample(10, 50, seed=11)
        w = WeightVector.uniform(50)
        res = estimate_md(s)
        p_grid, v_grid = grid_oracles(10).minimum(s, w.d)
        assert abs(res.p_hat - p_grid) <= 1e-5
        assert res.objective <= v_grid + 1e-12
        assert res.objective == pytest.approx(cvm_distance(s, w, res.p_hat), abs=1e-15)

    def test_degenerate_all_zero(self):
        res = estimate_md(Sample.from_values([0, 0, 0], 5))
        assert res.p_hat == EPS
        assert res.at_boundary

    def test_degenerate_all_max(self):
        res = estimate_md(Sample.from_values([5, 5], 5))
        assert res.p_hat == pytest.approx(1 - EPS)
        assert res.at_boundary

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 6), min_size=2, max_size=25), st.randoms())
    def test_permutation_equivariance(self, xs, rnd):
        ys = list(xs)
        rnd.shuffle(ys)
        a = estimate_md(Sample.from_values(xs, 6))
        b = estimate_md(Sample.from_values(ys, 6))
        assert a.p_hat == pytest.approx(b.p_hat, abs=1e-9)

    def test_quadratic_approximation_shrinks(self):
        # average sup |L - Q| over |u| <= 2 decreases as n grows
        p0 = 0.3
        gaps = []
        for n in (100, 400, 1600, 6400):
            vals = [quadratic_approximation_gap(seeded_sample(10, n, p0, seed=5, index=r), p0)
                    for r in range(200)]
            gaps.append(np.mean(vals))
        assert all(a > b for a, b in zip(gaps, gaps[1:])), gaps


class TestEstimateMl:
    def test_mean(self):
        res = estimate_ml(Sample.from_values([3, 2, 4], 10))
        assert res.p_hat == pytest.approx(0.3)
        assert res.objective == 0.0

    def test_all_zero_clamped(self):
        res = estimate_ml(Sample.from_values([0, 0], 5))
        assert res.p_hat == EPS
        assert res.at_boundary

    def test_arithmetic_oracle(self):
        s = seeded_sample(20, 37, seed=8)
        total = 0
        for x in s.observations:
            total += int(x)
        assert estimate_ml(s).p_hat == pytest.approx(total / 37 / 20, rel=1e-15)


class TestRho:
    def test_identity_point(self):
        assert rho(1.0, DisparityParams(0.5, 1.5)) == 0.0

    @pytest.mark.parametrize("c1,c2", [(0.5, 1.5), (0.2, 3.0), (0.8, 1.25)])
    def test_continuity_at_knots(self, c1, c2):
        params = DisparityParams(c1, c2)
        for knot in (c1, c2):
            assert rho(knot, params) == pytest.approx(knot * math.log(knot), abs=1e-15)
            linear = (math.log(knot) + 1.0) * knot - knot
            assert abs(linear - knot * math.log(knot)) <= 1e-12
            for h in (1e-9, -1e-9):
                assert abs(rho(knot + h, params) - rho(knot, params)) <= 1e-8

    @pytest.mark.parametrize("c1,c2", [(0.5, 1.5), (0.8, 1.25)])
    def test_derivative_continuity(self, c1, c2):
        params = DisparityParams(c1, c2)
        h = 1e-6
        for knot in (c1, c2):
            left = (rho(knot, params) - rho(knot - h, params)) / h
            right = (rho(knot + h, params) - rho(knot, params)) / h
            assert left == pytest.approx(right, abs=1e-5)

    def test_upper_branch_value(self):
        val = rho(2.0, DisparityParams(0.5, 1.5))
        assert val == pytest.approx(2 * (math.log(1.5) + 1) - 1.5, abs=1e-15)
        assert val == pytest.approx(1.310930, abs=1e-6)

    def test_zero(self):
        assert rho(0.0, DisparityParams(0.5, 2.0)) == -0.5

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            rho(-0.1)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            DisparityParams(2.0, 1.0)
        with pytest.raises(ValueError):
            DisparityParams(0.0, 1.0)


def naive_disparity(sample, p, c1, c2):
    from math import comb, log
    m, n = sample.m, sample.n
    total = 0.0
    for k in range(m + 1):
        fk = comb(m, k) * p**k * (1 - p) ** (m - k)
        fnk = sum(1 for x in sample.observations if x == k) / n
        x = fnk / fk
        if x < c1:
            r = (log(c1) + 1) * x - c1
        elif x > c2:
            r = (log(c2) + 1) * x - c2
        else:
            r = x * log(x) if x > 0 else 0.0
        total += r * fk
    return total


class TestLikelihoodDisparity:
    def test_zero_at_exact_fit(self):
        # empirical pmf equal to f(.; 0.5) with m = 2: counts 1, 2, 1
        s = Sample.from_values([0, 1, 1, 2], 2)
        assert likelihood_disparity(s, 0.5, DisparityParams(0.5, 2.0)) == pytest.approx(0.0, abs=1e-15)

    def test_kl_when_untruncated(self):
        s = Sample.from_values([0, 1, 1, 2, 3, 3], 3)
        p = 0.45
        model = BinomialModel(3)
        f = model.pmf_vector(p)
        fn = s.empirical_pmf()
        kl = sum(a * math.log(a / b) for a, b in zip(fn, f) if a > 0)
        assert likelihood_disparity(s, p, DisparityParams(1e-3, 1e3)) == pytest.approx(kl, rel=1e-12)

    def test_naive_oracle(self):
        s = seeded_sample(10, 40, seed=21)
        got = likelihood_disparity(s, 0.3, DisparityParams(0.5, 2.0))
        assert got == pytest.approx(naive_disparity(s, 0.3, 0.5, 2.0), rel=1e-12, abs=1e-15)


class TestEstimateE:
    def test_kl_limit_is_ml(self):
        s = seeded_sample(10, 60, seed=2)
        e = estimate_e(s, DisparityParams(1e-9, 1e9))
        assert e.p_hat == pytest.approx(estimate_ml(s).p_hat, abs=1e-6)

    def test_symmetric_single_trial(self):
        s = Sample.from_values([0, 1], 1)
        res = estimate_e(s, DisparityParams(0.5, 2.0))
        assert res.p_hat == pytest.approx(0.5, abs=1e-8)
        grid = np.linspace(0.01, 0.99, 99)
        vals = [likelihood_disparity(s, p, DisparityParams(0.5, 2.0)) for p in grid]
        assert grid[int(np.argmin(vals))] == pytest.approx(0.5)

    def test_resists_gross_errors(self):
        base = seeded_sample(10, 50, seed=13).observations
        s = Sample.from_values(list(base) + [10, 10, 10], 10)
        params = DisparityParams(0.5, 2.0)
        e = estimate_e(s, params)
        ml = estimate_ml(s)
        assert abs(e.p_hat - 0.3) < abs(ml.p_hat - 0.3)
        grid = np.linspace(0.2, 0.45, 25_001)
        vals = [likelihood_disparity(s, p, params) for p in grid]
        assert abs(grid[int(np.argmin(vals))] - e.p_hat) <= 2e-5

    def test_contaminated_draws(self):
        model = BinomialModel(10)
        cm = ContaminatedModel(model, 0.3, 0.05, 10)
        err_e, err_ml = [], []
        for r in range(100):
            s = Sample(sample_contaminated(cm, 80, derive_stream(17, r)), model)
            err_e.append(abs(estimate_e(s).p_hat - 0.3))
            err_ml.append(abs(estimate_ml(s).p_hat - 0.3))
        assert np.mean(err_e) < np.mean(err_ml)


class TestMinimizeScalar:
    def test_parabola(self):
        x, fx = minimize_scalar(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 1e-8)
        assert x == pytest.approx(0.3, abs=1e-8)
        assert fx <= 1e-16

    def test_constant_returns_lower_end(self):
        x, fx = minimize_scalar(lambda x: 1.0, 0.0, 1.0)
        assert x == 0.0
        assert fx == 1.0

    def test_off_grid_minimum(self):
        target = 0.123456789
        x, _ = minimize_scalar(lambda x: abs(x - target) ** 1.5, 0.0, 1.0, 1e-10)
        assert x == pytest.approx(target, abs=1e-9)

    def test_global_over_local(self):
        # local minimum at 0.8 is shallower than the global one at 0.2
        f = lambda x: min((x - 0.2) ** 2 - 0.1, (x - 0.8) ** 2 - 0.05)
        x, _ = minimize_scalar(f, 0.0, 1.0)
        assert x == pytest.approx(0.2, abs=1e-8)

    def test_grid_oracle_on_cvm(self, grid_oracles):
        s = seeded_sample(10, 30, seed=31)
        w = WeightVector.uniform(30)
        x, fx = minimize_scalar(lambda p: cvm_distance(s, w, p), EPS, 1 - EPS)
        p_grid, v_grid = grid_oracles(10).minimum(s, w.d)
        assert abs(x - p_grid) <= 1e-5
        assert fx <= v_grid + 1e-12

    def test_non_finite_reports_abscissa(self):
        def f(x):
            return float("nan") if x > 0.5 else x

        with pytest.raises(NonFiniteObjectiveError) as info:
            minimize_scalar(f, 0.0, 1.0)
        assert info.value.x > 0.5

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            minimize_scalar(lambda x: x, 1.0, 0.0)
