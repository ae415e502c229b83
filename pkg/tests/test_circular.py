"""Coefficient-table distribution: updates, estimators, invariants vs grid oracle."""

import json
import math

import numpy as np
import pytest

from fieldtrack import (CircularDistribution, CoefficientCapError,
                        DegenerateLikelihoodError, SensorParams,
                        UndefinedEstimateError)
from fieldtrack.circular import UNIFORM_C0

from gridref import GridDensity

TAU0 = 20e-9


def ideal_params(**kw):
    defaults = dict(tau0=TAU0, K=10, t2star=math.inf, xi0=1.0, xi1=1.0)
    defaults.update(kw)
    return SensorParams(**defaults)


def pdf_of(d, n=1 << 14):
    return d.pdf_grid(n)


class TestUniform:
    def test_flat_density(self):
        d = CircularDistribution.uniform(65536, 1e-12)
        assert d.truncation_order == 0
        assert d.coefficient(0) == pytest.approx(UNIFORM_C0, rel=1e-15)
        for phi in (0.3, -2.0, 3.1):
            assert d.evaluate_pdf(phi) == pytest.approx(UNIFORM_C0, rel=1e-12)

    def test_flat_prior_has_no_estimate(self):
        d = CircularDistribution.uniform()
        with pytest.raises(UndefinedEstimateError):
            d.holevo_std(TAU0)
        with pytest.raises(UndefinedEstimateError):
            d.estimate_frequency(TAU0)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            CircularDistribution.uniform(0, 1e-12)
        with pytest.raises(ValueError):
            CircularDistribution.uniform(16, -1e-3)


class TestEvaluatePdf:
    def test_matches_independent_summation(self):
        # a few random low-order tables against a hand-rolled complex sum
        rng = np.random.default_rng(19)
        for _ in range(5):
            entries = [(0, UNIFORM_C0)]
            for j in (1, 2, 3):
                entries.append((j, complex(rng.normal(0, 0.02), rng.normal(0, 0.02))))
            d = CircularDistribution.from_coefficients(entries)
            for phi in rng.uniform(-math.pi, math.pi, 16):
                direct = complex(0)
                for j in range(-3, 4):
                    c = d.coefficient(j)
                    direct += c * complex(math.cos(j * phi), math.sin(j * phi))
                assert abs(direct.imag) < 1e-15
                assert d.evaluate_pdf(float(phi)) == pytest.approx(
                    direct.real, abs=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            CircularDistribution.uniform().evaluate_pdf(math.inf)


class TestBayesUpdate:
    def test_single_ideal_update_mu0(self):
        d = CircularDistribution.uniform().bayes_update(0, 0, 0.0, ideal_params())
        assert d.coefficient(0) == pytest.approx(UNIFORM_C0, rel=1e-15)
        assert d.coefficient(1) == pytest.approx(1 / (4 * math.pi), rel=1e-13)
        assert d.coefficient(-1) == pytest.approx(1 / (4 * math.pi), rel=1e-13)
        assert d.truncation_order == 1
        # posterior (1 + cos phi)/(2 pi)
        assert d.evaluate_pdf(0.0) == pytest.approx(1 / math.pi, rel=1e-12)
        assert d.evaluate_pdf(math.pi) == pytest.approx(0.0, abs=1e-15)

    def test_single_ideal_update_mu1(self):
        d = CircularDistribution.uniform().bayes_update(1, 0, 0.0, ideal_params())
        assert d.coefficient(1) == pytest.approx(-1 / (4 * math.pi), rel=1e-13)

    def test_matches_grid_oracle_with_fidelities(self):
        # seven-coefficient prior built from two updates, then the documented case
        params = SensorParams(tau0=TAU0, K=10, t2star=100e-6, xi0=0.88, xi1=1.0)
        d = CircularDistribution.uniform()
        g = GridDensity(1 << 14)
        for mu, k, theta in [(0, 1, 0.3), (1, 0, 1.1)]:
            d = d.bayes_update(mu, k, theta, params)
            g.bayes(mu, k, theta, params)
        d = d.bayes_update(0, 2, 0.7, params)
        g.bayes(0, 2, 0.7, params)
        assert np.max(np.abs(pdf_of(d) - g.p)) < 1e-9

    def test_rejects_bad_outcome_and_index(self):
        d = CircularDistribution.uniform()
        with pytest.raises(ValueError):
            d.bayes_update(2, 0, 0.0, ideal_params())
        with pytest.raises(ValueError):
            d.bayes_update(0, 11, 0.0, ideal_params(K=10))

    def test_degenerate_outcome_raises(self):
        # delta-like spike at phi=0, then observe the impossible dark-fringe outcome
        d = CircularDistribution.from_coefficients(
            [(j, UNIFORM_C0) for j in range(0, 65)])
        with pytest.raises(DegenerateLikelihoodError):
            d.bayes_update(1, 0, 0.0, ideal_params())

    def test_cap_exceeded(self):
        d = CircularDistribution.uniform(j_max=8, prune_tol=0.0)
        with pytest.raises(CoefficientCapError):
            d.bayes_update(0, 4, 0.0, ideal_params())

    def test_order_grows_by_at_most_shift(self):
        params = ideal_params()
        d = CircularDistribution.uniform()
        for k in (3, 1, 2):
            before = d.truncation_order
            d = d.bayes_update(0, k, 0.4, params)
            assert d.truncation_order <= before + (1 << k)


class TestConvolve:
    def test_identity_cases(self):
        d = CircularDistribution.uniform().bayes_update(0, 2, 0.5, ideal_params())
        assert d.convolve_wiener(0.0, 1e-4, TAU0) is d
        assert d.convolve_wiener(2e6, 0.0, TAU0) is d

    def test_first_order_damping_factor(self):
        d = CircularDistribution.uniform().bayes_update(0, 0, 0.0, ideal_params())
        out = d.convolve_wiener(2e6, 100e-6, TAU0)
        # exponent 2*(pi*1*kappa*tau0)^2*dt evaluated by hand
        expected = math.exp(-2.0 * (math.pi * 2e6 * 20e-9) ** 2 * 1e-4)
        assert abs(out.coefficient(1)) / abs(d.coefficient(1)) == pytest.approx(
            expected, rel=1e-12)
        assert expected == pytest.approx(math.exp(-3.1583e-6), rel=1e-4)

    def test_never_grows_coefficients(self):
        params = ideal_params()
        d = CircularDistribution.uniform()
        for mu, k in [(0, 0), (1, 2), (0, 3)]:
            d = d.bayes_update(mu, k, 0.9, params)
        out = d.convolve_wiener(5e6, 2e-5, TAU0)
        for j in range(1, d.truncation_order + 1):
            assert abs(out.coefficient(j)) <= abs(d.coefficient(j)) + 1e-18
        assert out.coefficient(0) == pytest.approx(UNIFORM_C0, rel=1e-15)

    def test_rejects_negative_arguments(self):
        d = CircularDistribution.uniform()
        with pytest.raises(ValueError):
            d.convolve_wiener(-1.0, 1e-6, TAU0)
        with pytest.raises(ValueError):
            d.convolve_wiener(1.0, -1e-6, TAU0)


class TestEstimators:
    def test_estimate_zero_for_real_positive_first_harmonic(self):
        d = CircularDistribution.from_coefficients([(0, UNIFORM_C0), (1, 0.1)])
        assert d.estimate_frequency(TAU0) == 0.0

    def test_estimate_quarter_band(self):
        # c_{-1} = r e^{i pi/2}  ->  f = (pi/2)/(2 pi tau0) = 1/(4 tau0) = 12.5 MHz
        d = CircularDistribution.from_coefficients([(-1, 0.05j), (0, UNIFORM_C0)])
        assert d.estimate_frequency(TAU0) == pytest.approx(1 / (4 * TAU0), rel=1e-12)

    def test_estimate_wraps_into_band(self):
        d = CircularDistribution.from_coefficients([(0, UNIFORM_C0), (1, -0.1)])
        # arg(c_{-1}) = pi maps to the lower band edge, not +1/(2 tau0)
        assert d.estimate_frequency(TAU0) == pytest.approx(-0.5 / TAU0)

    def test_holevo_values(self):
        d = CircularDistribution.from_coefficients([(0, UNIFORM_C0), (1, UNIFORM_C0)])
        assert d.holevo_std(TAU0) == 0.0
        d = CircularDistribution.from_coefficients([(0, UNIFORM_C0), (1, 1 / (4 * math.pi))])
        assert d.holevo_std(TAU0) == pytest.approx(
            math.sqrt(3.0) / (2 * math.pi * TAU0), rel=1e-12)

    def test_holevo_matches_sampled_circular_variance(self):
        # wrapped Gaussian: c_j = exp(-j^2 s^2/2) e^{-i j phi0} / (2 pi)
        s, phi0 = 0.05, 0.8
        entries = [(j, math.exp(-0.5 * j * j * s * s) / (2 * math.pi)
                    * complex(math.cos(-j * phi0), math.sin(-j * phi0)))
                   for j in range(0, 60)]
        d = CircularDistribution.from_coefficients(entries)
        rng = np.random.default_rng(7)
        draws = np.mod(rng.normal(phi0, s, 200_000) + math.pi, 2 * math.pi) - math.pi
        r = abs(np.mean(np.exp(1j * draws)))
        sampled = math.sqrt(r ** -2 - 1.0) / (2 * math.pi * TAU0)
        assert d.holevo_std(TAU0) == pytest.approx(sampled, rel=0.05)
        assert d.holevo_std(TAU0) == pytest.approx(s / (2 * math.pi * TAU0), rel=0.05)

    def test_estimate_matches_grid_argmax_for_peaked_posterior(self):
        # sharp wrapped Gaussian off any grid point
        s, phi0 = 0.01, 0.7693
        entries = [(j, math.exp(-0.5 * j * j * s * s) / (2 * math.pi)
                    * complex(math.cos(-j * phi0), math.sin(-j * phi0)))
                   for j in range(0, 1500)]
        d = CircularDistribution.from_coefficients(entries)
        n = 1 << 14
        peak_phi = -math.pi + 2 * math.pi * int(np.argmax(d.pdf_grid(n))) / n
        cell = 1.0 / n / TAU0  # one grid cell in Hz
        assert abs(d.estimate_frequency(TAU0) - peak_phi / (2 * math.pi * TAU0)) < cell

    def test_control_phase(self):
        c = complex(math.cos(math.pi / 3), math.sin(math.pi / 3))
        d = CircularDistribution.from_coefficients(
            [(0, UNIFORM_C0), (-4, 0.02 * c)])
        assert d.control_phase(2) == pytest.approx(math.pi / 6, rel=1e-12)
        d = CircularDistribution.from_coefficients([(0, UNIFORM_C0), (-4, 0.02)])
        assert d.control_phase(2) == 0.0
        assert CircularDistribution.uniform().control_phase(3) == 0.0


class TestInvariants:
    def params_cases(self, rng):
        return SensorParams(
            tau0=TAU0, K=6, t2star=float(rng.uniform(20e-6, 200e-6)),
            xi0=float(rng.uniform(0.75, 1.0)), xi1=float(rng.uniform(0.9, 1.0)))

    def test_random_sequences_match_grid_oracle(self):
        rng = np.random.default_rng(42)
        n_grid = 1 << 14
        for _ in range(50):
            params = self.params_cases(rng)
            kappa = float(rng.uniform(0, 5e6))
            d = CircularDistribution.uniform()
            g = GridDensity(n_grid)
            for _ in range(rng.integers(5, 21)):
                if rng.random() < 0.7:
                    k = int(rng.integers(0, 7))
                    theta = float(rng.uniform(-math.pi, math.pi))
                    mu = 0 if rng.random() < g.outcome_probability(0, k, theta, params) else 1
                    d = d.bayes_update(mu, k, theta, params)
                    g.bayes(mu, k, theta, params)
                else:
                    dt = float(rng.uniform(0, 1e-4))
                    d = d.convolve_wiener(kappa, dt, TAU0)
                    g.convolve(kappa, dt, TAU0)
                assert np.max(np.abs(pdf_of(d, n_grid) - g.p)) < 1e-8
                assert d.coefficient(0) == pytest.approx(UNIFORM_C0, rel=1e-15)

    def test_hermitian_symmetry_and_bounded_coefficients(self):
        rng = np.random.default_rng(11)
        params = self.params_cases(rng)
        d = CircularDistribution.uniform()
        for _ in range(30):
            k = int(rng.integers(0, 7))
            theta = float(rng.uniform(-math.pi, math.pi))
            d = d.bayes_update(int(rng.integers(0, 2)), k, theta, params)
            for j in range(0, d.truncation_order + 1, 7):
                assert d.coefficient(-j) == pytest.approx(
                    d.coefficient(j).conjugate(), abs=1e-12)
                assert 2 * math.pi * abs(d.coefficient(j)) <= 1 + 1e-9

    def test_shift_moves_estimate_exactly(self):
        params = ideal_params()
        d = CircularDistribution.uniform()
        rng = np.random.default_rng(5)
        for _ in range(12):
            d = d.bayes_update(int(rng.integers(0, 2)), int(rng.integers(0, 4)),
                               float(rng.uniform(-1, 1)), params)
        base = d.estimate_frequency(TAU0)
        for dphi in (0.3, -1.2, 2.9):
            shifted = d.shift_phase(dphi).estimate_frequency(TAU0)
            period = 1.0 / TAU0
            delta = (shifted - base - dphi / (2 * math.pi * TAU0)) % period
            assert min(delta, period - delta) < 1e-6 * period


class TestDebugDump:
    def test_round_trip(self):
        params = ideal_params()
        d = CircularDistribution.uniform().bayes_update(0, 1, 0.7, params)
        text = d.to_debug_json()
        rows = json.loads(text)
        assert all(len(r) == 3 for r in rows)
        back = CircularDistribution.from_debug_json(text)
        assert back.truncation_order == d.truncation_order
        for j in range(-2, 3):
            assert back.coefficient(j) == pytest.approx(d.coefficient(j), abs=1e-15)

    def test_from_coefficients_rejects_asymmetry(self):
        with pytest.raises(ValueError):
            CircularDistribution.from_coefficients(
                [(0, UNIFORM_C0), (1, 0.1 + 0.05j), (-1, 0.1 + 0.05j)])
