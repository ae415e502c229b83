"""Truth-path generation: determinism, clamping, statistics, integrals."""

import io
import math

import numpy as np
import pytest

from fieldtrack import (EventTruthPath, GridTruthPath, SignalModel,
                        export_waveform_csv, make_truth_path)

TAU0 = 20e-9


class TestSignalModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            SignalModel(kappa=-1.0)
        with pytest.raises(ValueError):
            SignalModel(kappa=0.0, clamp=30e6, f_range=25e6)
        with pytest.raises(ValueError):
            SignalModel(kappa=0.0, f0="sideways")

    def test_fixed_f0_outside_band_rejected(self):
        with pytest.raises(ValueError):
            EventTruthPath(SignalModel(kappa=0.0, f0=25e6))


class TestEventPath:
    def test_constant_when_kappa_zero(self):
        path = EventTruthPath(SignalModel(kappa=0.0, f0=3e6), seed=1)
        path.advance(100e-6, substep=TAU0)
        assert path.value_at(0.0) == 3e6
        assert path.value_at(50e-6) == 3e6
        assert path.accumulated_phase(10e-6, 20e-6) == pytest.approx(
            2 * math.pi * 3e6 * 20e-6, rel=1e-12)

    def test_clamp_enforced_from_boundary_start(self):
        model = SignalModel(kappa=5e6, clamp=24e6, f0=24e6)
        path = EventTruthPath(model, seed=3)
        path.advance(2e-3, substep=1e-6)
        _, f = path.breakpoints()
        assert np.max(np.abs(f)) <= 24e6

    def test_same_seed_same_path(self):
        model = SignalModel(kappa=2e6)
        a = EventTruthPath(model, seed=77)
        b = EventTruthPath(model, seed=77)
        for to_t in (5e-6, 6e-6, 30e-6):
            a.advance(to_t, substep=TAU0)
            b.advance(to_t, substep=TAU0)
        ta, fa = a.breakpoints()
        tb, fb = b.breakpoints()
        assert np.array_equal(ta, tb) and np.array_equal(fa, fb)

    def test_queries_do_not_perturb_generation(self):
        model = SignalModel(kappa=2e6)
        a = EventTruthPath(model, seed=9)
        b = EventTruthPath(model, seed=9)
        a.advance(5e-6, substep=TAU0)
        a.value_at(2e-6)
        a.accumulated_phase(0.0, 4e-6)
        a.advance(9e-6, substep=1e-6)
        b.advance(5e-6, substep=TAU0)
        b.advance(9e-6, substep=1e-6)
        assert np.array_equal(a.breakpoints()[1], b.breakpoints()[1])

    def test_time_regression_rejected(self):
        path = EventTruthPath(SignalModel(kappa=1e6), seed=0)
        path.advance(1e-6, substep=TAU0)
        with pytest.raises(ValueError):
            path.advance(0.5e-6, substep=TAU0)
        with pytest.raises(ValueError):
            path.advance(2e-6, substep=0.0)

    def test_out_of_range_queries(self):
        path = EventTruthPath(SignalModel(kappa=1e6), seed=0)
        path.advance(1e-6, substep=TAU0)
        with pytest.raises(ValueError):
            path.value_at(2e-6)
        with pytest.raises(ValueError):
            path.accumulated_phase(0.5e-6, 1e-6)

    def test_value_at_breakpoint_and_between(self):
        path = EventTruthPath(SignalModel(kappa=3e6), seed=5)
        path.advance(10 * TAU0, substep=TAU0)
        t, f = path.breakpoints()
        assert path.value_at(float(t[3])) == f[3]
        mid = float(t[3]) + 0.4 * TAU0
        assert path.value_at(mid) == f[3]

    def test_two_half_windows_integral(self):
        # piecewise f: f1 on the first half, f2 on the second
        path = EventTruthPath(SignalModel(kappa=0.0, f0=2e6), seed=0)
        path.advance(1e-6, substep=1e-6)
        path._f[:path._n] = [2e6, 2e6]
        path.advance(2e-6, substep=1e-6)
        path._f[path._n - 1] = 4e6
        path._f[path._n - 2] = 4e6
        # f = 2 MHz on [0, 1us) then 4 MHz on [1us, 2us)
        got = path.accumulated_phase(0.0, 2e-6)
        assert got == pytest.approx(2 * math.pi * (2e6 + 4e6) * 1e-6, rel=1e-12)

    def test_refining_substep_changes_integral_within_increment_scale(self):
        model = SignalModel(kappa=2e6)
        tau = 5.12e-6
        coarse = EventTruthPath(model, seed=21)
        coarse.advance(tau, substep=2 * TAU0)
        fine = EventTruthPath(model, seed=21)
        fine.advance(tau, substep=TAU0)
        diff = abs(coarse.accumulated_phase(0, tau) - fine.accumulated_phase(0, tau))
        bound = 2 * math.pi * model.kappa * tau ** 1.5
        assert diff < bound


class TestGridPath:
    def test_matches_constant_and_integral(self):
        path = GridTruthPath(SignalModel(kappa=0.0, f0=-5e6), seed=0, dt=TAU0)
        path.advance(50e-6)
        assert path.value_at(13.7e-6) == -5e6
        assert path.accumulated_phase(1e-6, 10e-6) == pytest.approx(
            2 * math.pi * -5e6 * 10e-6, rel=1e-12)

    def test_partial_cell_integral(self):
        path = GridTruthPath(SignalModel(kappa=1e6), seed=4, dt=TAU0)
        path.advance(100 * TAU0)
        t, f = path.breakpoints()
        # window straddling cells 10..12 with fractional edges
        a, b = 10.25 * TAU0, 12.5 * TAU0
        direct = (f[10] * 0.75 + f[11] + f[12] * 0.5) * TAU0
        assert path.accumulated_phase(a, b - a) == pytest.approx(
            2 * math.pi * direct, rel=1e-9)

    def test_request_batching_irrelevant(self):
        model = SignalModel(kappa=2e6)
        a = GridTruthPath(model, seed=13, dt=TAU0)
        b = GridTruthPath(model, seed=13, dt=TAU0)
        a.advance(3e-6)
        a.advance(40e-6)
        b.advance(40e-6)
        fa, fb = a.breakpoints()[1], b.breakpoints()[1]
        assert np.array_equal(fa, fb)

    def test_clamped_values(self):
        path = GridTruthPath(SignalModel(kappa=8e6, clamp=24e6, f0=23.9e6),
                             seed=2, dt=1e-6)
        path.advance(3e-3)
        assert np.max(np.abs(path.breakpoints()[1])) <= 24e6


class TestStatistics:
    def test_increment_variance(self):
        # var of f(t) - f(0) over an ensemble approximates kappa^2 * t
        kappa, t = 2e6, 100e-6
        n = 10_000
        deltas = np.empty(n)
        model = SignalModel(kappa=kappa, clamp=24e6)
        for i in range(n):
            path = EventTruthPath(SignalModel(kappa=kappa, f0=0.0), seed=i)
            path.advance(t, substep=t / 8)
            deltas[i] = path.value_at(t)
        target = kappa ** 2 * t
        se = target * math.sqrt(2.0 / n)  # std error of a variance estimate
        assert abs(np.var(deltas) - target) < 5 * se

    def test_modes_agree_in_distribution(self):
        # endpoint spread of both representations matches within MC error
        kappa, t = 3e6, 60e-6
        n = 10_000
        ev = np.empty(n)
        gr = np.empty(n)
        for i in range(n):
            p1 = EventTruthPath(SignalModel(kappa=kappa, f0=0.0), seed=i)
            p1.advance(t, substep=t)
            ev[i] = p1.value_at(t)
            p2 = GridTruthPath(SignalModel(kappa=kappa, f0=0.0), seed=i, dt=t / 4)
            p2.advance(t)
            gr[i] = p2.value_at(t)  # cell at t holds the value after 4 steps
        v1, v2 = np.var(ev), np.var(gr)
        se = kappa ** 2 * t * math.sqrt(2.0 / n)
        assert abs(v1 - v2) < 5 * math.sqrt(2) * se

    def test_clamp_rate_agrees_between_modes(self):
        kappa, t, clamp = 6e6, 1e-4, 24e6
        n = 3000
        hit_ev = hit_gr = 0
        for i in range(n):
            m = SignalModel(kappa=kappa, clamp=clamp, f0=23e6)
            p1 = EventTruthPath(m, seed=i)
            p1.advance(t, substep=t / 64)
            hit_ev += np.any(np.abs(p1.breakpoints()[1]) >= clamp)
            p2 = GridTruthPath(m, seed=i, dt=t / 64)
            p2.advance(t)
            tg, fg = p2.breakpoints()
            hit_gr += np.any(np.abs(fg[tg <= t]) >= clamp)
        rate_ev, rate_gr = hit_ev / n, hit_gr / n
        se = math.sqrt(2 * 0.25 / n)
        assert abs(rate_ev - rate_gr) < 5 * se


def test_waveform_csv_export():
    path = EventTruthPath(SignalModel(kappa=1e6), seed=8)
    path.advance(1e-6, substep=TAU0)
    buf = io.StringIO()
    export_waveform_csv(path, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t_seconds,f_hz"
    assert len(lines) == 1 + len(path.breakpoints()[0])


def test_make_truth_path_auto():
    model = SignalModel(kappa=1e6)
    assert make_truth_path(model, 0, mode="auto", dt=TAU0,
                           duration=5e-3).mode == "grid"
    assert make_truth_path(model, 0, mode="auto", dt=TAU0,
                           duration=2.0).mode == "event"
    with pytest.raises(ValueError):
        make_truth_path(model, 0, mode="auto")
    with pytest.raises(ValueError):
        make_truth_path(model, 0, mode="banana")
