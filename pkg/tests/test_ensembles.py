import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import gue_two_point_sq_gap
from spacinglab.ensembles import (
    ClosestSpacing,
    RawValues,
    SamplerError,
    Spectrum,
    closest_spacing,
    count_close_pairs,
    rescale_factor,
    rescale_statistic,
    run_trials,
    sample_cue_spectrum,
    sample_gue_spectrum,
    spacing_stats,
    tail_experiment,
)
from spacinglab.kernels import Ensemble, gue_kernel
from spacinglab.rng import check_seed
from spacinglab.windows import Interval

TWO_PI = 2 * math.pi
FULL = Interval.full_circle()
# E[(l1 - l2)^2] for GUE n=2, frozen from the two-dimensional quadrature oracle.
GUE2_SQ_GAP = 3.0


def cue(values):
    return Spectrum(Ensemble.CUE, len(values), np.sort(np.asarray(values, float)), 0)


def gue(values):
    return Spectrum(Ensemble.GUE, len(values), np.sort(np.asarray(values, float)), 0)


class TestCueSampler:
    def test_shape_and_range(self):
        s = sample_cue_spectrum(32, 7)
        assert s.values.shape == (32,)
        assert np.all((s.values >= 0) & (s.values < TWO_PI)) and np.all(np.diff(s.values) > 0)

    def test_n1_uniform(self):
        v = run_trials(Ensemble.CUE, 1, 11, 10_000, RawValues())[:, 0]
        assert abs(v.mean() - math.pi) < 3 * TWO_PI / math.sqrt(12 * v.size)

    def test_first_intensity(self):
        L = math.pi / 2
        v = run_trials(Ensemble.CUE, 16, 12, 10_000, RawValues())
        counts = (v < L).sum(axis=1)
        assert abs(counts.mean() - 16 * L / TWO_PI) < 3 * counts.std() / math.sqrt(counts.size)

    def test_repulsion(self):
        v = run_trials(Ensemble.CUE, 8, 13, 5_000, RawValues())
        counts = (v < math.pi).sum(axis=1)
        assert counts.var() < 4.0

    def test_deterministic(self):
        a = sample_cue_spectrum(20, 99, trial=3).values
        b = sample_cue_spectrum(20, 99, trial=3).values
        c = sample_cue_spectrum(20, 99, trial=4).values
        assert np.array_equal(a, b) and not np.array_equal(a, c)

    def test_bad_seed(self):
        with pytest.raises(ValueError):
            sample_cue_spectrum(4, -1)

    def test_stall_reports_seed(self, monkeypatch):
        import spacinglab.ensembles as ens

        monkeypatch.setattr(ens, "PROPOSAL_CAP", 20)
        monkeypatch.setattr(ens, "_cue_core", lambda n, xs, us: (np.zeros(n), -1))
        with pytest.raises(SamplerError) as info:
            sample_cue_spectrum(50, 5, trial=2)
        assert info.value.seed == 5 and info.value.trial == 2


class TestGueSampler:
    def test_n1_variance(self):
        v = run_trials(Ensemble.GUE, 1, 21, 10_000, RawValues())[:, 0]
        se = 0.5 * math.sqrt(2 / v.size)
        assert abs(v.var() - 0.5) < 3 * se

    def test_n2_gap_oracle(self):
        assert gue_two_point_sq_gap() == pytest.approx(GUE2_SQ_GAP, rel=1e-9)

    def test_n2_gap_monte_carlo(self):
        v = run_trials(Ensemble.GUE, 2, 22, 100_000, RawValues())
        sq = (v[:, 1] - v[:, 0]) ** 2
        assert abs(sq.mean() - GUE2_SQ_GAP) < 3 * sq.std() / math.sqrt(sq.size)

    def test_density_n64(self):
        v = run_trials(Ensemble.GUE, 64, 23, 1_000, RawValues()).ravel()
        edges = np.linspace(-10, 10, 41)
        hist, _ = np.histogram(v, edges, density=True)
        # Bin averages of K_64(x, x)/64 from an 8-point rule per bin.
        x, w = np.polynomial.legendre.leggauss(8)
        half = 0.5 * np.diff(edges)
        pts = edges[:-1, None] + half[:, None] * (x + 1)
        ref = (gue_kernel(64, pts, pts) / 64) @ w / 2
        assert np.sum(np.abs(hist - ref)) * (edges[1] - edges[0]) < 0.05


class TestStatistics:
    def test_closest_examples(self):
        assert closest_spacing(cue([0.10, 0.15, 0.50]), FULL) == pytest.approx(0.05)
        assert closest_spacing(cue([0.05, 6.25]), FULL) == pytest.approx(TWO_PI - 6.25 + 0.05)
        assert closest_spacing(cue([1.0, 1.2]), Interval.arc(3, 4)) == math.inf

    def test_count_examples(self):
        assert count_close_pairs(gue([0.0, 0.1, 0.2, 0.3]), Interval.real(-1, 1), 1.0) == 6
        assert count_close_pairs(cue([0.0, 0.01, 0.02]), FULL, 0.015) == 2
        assert count_close_pairs(cue([0.0, 0.01, 0.02]), FULL, 1e-9) == 0

    def test_wrap_midpoint(self):
        # The shorter arc between 6.2 and 0.1 is centred near 0.008.
        s = cue([0.1, 6.2])
        assert closest_spacing(s, Interval.arc(-0.05, 0.05)) == pytest.approx(TWO_PI - 6.1)
        assert closest_spacing(s, Interval.arc(3.0, 3.3)) == math.inf

    @settings(max_examples=200)
    @given(st.integers(0, 10**6), st.floats(1e-3, 1.0), st.floats(0.1, TWO_PI))
    def test_pivotal_equivalence(self, seed, gamma, length):
        s = sample_cue_spectrum(12, seed)
        w = Interval.arc(0.3, 0.3 + length)
        assert (count_close_pairs(s, w, gamma) == 0) == (closest_spacing(s, w) >= gamma)

    @settings(max_examples=100)
    @given(st.integers(0, 10**6), st.floats(1e-3, 1.0), st.floats(0.1, 3.0))
    def test_monotone(self, seed, gamma, length):
        s = sample_cue_spectrum(10, seed)
        w1, w2 = Interval.arc(1.0, 1.0 + length), Interval.arc(1.0, 1.0 + 1.5 * length)
        assert count_close_pairs(s, w1, gamma) <= count_close_pairs(s, w1, 1.3 * gamma)
        assert count_close_pairs(s, w1, gamma) <= count_close_pairs(s, w2, gamma)

    @given(st.integers(0, 10**6), st.floats(0, TWO_PI))
    def test_rotation_invariance(self, seed, angle):
        s = sample_cue_spectrum(10, seed)
        rot = cue(np.mod(s.values + angle, TWO_PI))
        assert abs(closest_spacing(s, FULL) - closest_spacing(rot, FULL)) < 1e-12

    def test_brute_force_pairs(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            s = sample_gue_spectrum(9, int(rng.integers(1 << 30)))
            w, g = Interval.real(-1.0, 1.5), 0.9
            v = s.values
            brute = sum(1 for i in range(9) for j in range(i + 1, 9) if v[j] - v[i] < g and w.contains(0.5 * (v[i] + v[j])))
            assert count_close_pairs(s, w, g) == brute


class TestRescaling:
    def test_examples(self):
        assert rescale_statistic(0.0, Ensemble.CUE, 64, FULL) == 0.0
        assert rescale_statistic(1e-3, Ensemble.CUE, 64, FULL) == pytest.approx(1e-3 * (64**4 / (72 * math.pi)) ** (1 / 3))
        assert rescale_statistic(1e-3, Ensemble.CUE, 64, FULL) == pytest.approx(0.04202, abs=1e-5)
        assert rescale_statistic(math.inf, Ensemble.CUE, 64, FULL) == math.inf

    def test_gue_window_checked(self):
        with pytest.raises(ValueError):
            rescale_factor(Ensemble.GUE, 16, Interval.real(-6, 0))

    def test_spacing_stats(self):
        st_ = spacing_stats(cue([0.1, 0.2, 3.0]), FULL, 0.15)
        assert st_.pair_count == 1 and st_.z_min == pytest.approx(0.1)


class TestExperiment:
    def test_tail_edges(self):
        res = tail_experiment(Ensemble.CUE, 16, FULL, [0.0, 5.0], 200, 3)
        assert res.tail[0] == 1.0 and res.tail[1] <= 1e-3

    def test_needs_trials(self):
        with pytest.raises(ValueError):
            tail_experiment(Ensemble.CUE, 16, FULL, [1.0], 10, 3)

    def test_workers_identical(self):
        a = run_trials(Ensemble.CUE, 12, 5, 60, ClosestSpacing(FULL), workers=1)
        b = run_trials(Ensemble.CUE, 12, 5, 60, ClosestSpacing(FULL), workers=2)
        assert a.tobytes() == b.tobytes()

    def test_env_workers(self, monkeypatch):
        from spacinglab.ensembles import resolve_workers

        monkeypatch.setenv("SPACINGLAB_WORKERS", "3")
        assert resolve_workers(None) == 3 and resolve_workers(1) == 1


def test_seed_range():
    assert check_seed(2**64 - 1) == 2**64 - 1
    with pytest.raises(ValueError):
        check_seed(2**64)
