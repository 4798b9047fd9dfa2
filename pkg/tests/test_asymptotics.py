import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import eta_mp, hermite_exact
from spacinglab.asymptotics import (
    DomainError,
    EquilibriumMeasure,
    EtaIndex,
    hermite_pr_approx,
    pr_error,
    pr_error_amplitude,
    pr_phase,
    pr_phase_naive,
    pr_ratio,
    semicircle_density,
    semicircle_measure,
    semicircle_tail_mass,
    unimodular_identity_residual,
    uue_eta_asymptotic,
)
from spacinglab.kernels import gue_kernel, hermite_scaled


def bulk_points(draw_n=st.integers(4, 500), w=st.floats(-1.3, 1.3)):
    return st.tuples(draw_n, w).map(lambda t: (t[1] * math.sqrt(t[0]), t[0]))


class TestPhase:
    @given(bulk_points())
    def test_unimodular(self, p):
        x, n = p
        assert abs(abs(pr_phase(x, n)) - 1) < 1e-12
        assert abs(abs(pr_ratio(x, n)) - 1) < 1e-12

    def test_origin(self):
        # At x = 0 both phase conventions give exp(i pi/4) i^(n - 1/2).
        assert pr_phase(0.0, 4) == pytest.approx(np.exp(1j * math.pi / 4) * np.exp(1j * 3.5 * math.pi / 2), abs=1e-14)

    def test_two_paths(self):
        a, b = pr_phase(1.0, 50), pr_phase_naive(1.0, 50)
        assert abs(np.angle(a / b)) < 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            pr_phase(2.0, 2)
        with pytest.raises(DomainError):
            pr_phase(1.38 * math.sqrt(10), 10)
        pr_phase(1.3 * math.sqrt(10), 10)


class TestHermiteApprox:
    def test_origin_n100(self):
        log_env, osc = hermite_pr_approx(100, 0.0)
        assert osc == pytest.approx((np.exp(1j * math.pi / 4) * 1j**99.5).real, abs=1e-12)
        exact = abs(float(hermite_exact(100, 0)))
        # H_100(0) = envelope * osc, so compare the envelope with |H| / |osc|.
        assert abs(math.exp(log_env) * abs(osc) / exact - 1) < 0.05

    def test_n50_x3(self):
        log_env, osc = hermite_pr_approx(50, 3.0)
        assert abs(osc) > 0.05
        exact = hermite_scaled(50, 3.0).value
        assert abs(math.exp(log_env) * osc / exact - 1) < 0.1

    def test_error_decay(self):
        amps = [pr_error_amplitude(n, 0.3) for n in (50, 100, 200)]
        for a, b in zip(amps, amps[1:]):
            assert 1.5 <= a / b <= 3.0

    def test_pointwise_error_is_small(self):
        assert pr_error(200, 0.3 * math.sqrt(200)) <= pr_error_amplitude(200, 0.3)

    def test_consecutive_ratio(self):
        n, x = 200, 1.0
        step = pr_phase(x, n + 1) / pr_phase(x, n)
        assert abs(step - pr_ratio(x, n)) < 10 / n
        assert pr_ratio(0.0, 7) == pytest.approx(1j, abs=1e-15)


class TestSemicircle:
    def test_examples(self):
        assert semicircle_density(50, 0.0) == pytest.approx(10 / math.pi)
        assert semicircle_density(8, 4.0) == 0.0
        assert semicircle_density(100, 5.0) == pytest.approx(math.sqrt(200) / math.pi * math.sqrt(1 - 25 / 200))
        # sqrt(175)/pi, evaluated independently.
        assert semicircle_density(100, 5.0) == pytest.approx(4.210844, abs=1e-6)

    @pytest.mark.parametrize("n", [20, 40, 80])
    @pytest.mark.parametrize("w", [0.0, 0.5])
    def test_kernel_diagonal(self, n, w):
        x = w * math.sqrt(n)
        assert abs(gue_kernel(n, x, x) / semicircle_density(n, x) - 1) <= 5 / n

    @given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
    def test_unimodular_identity(self, a, b):
        assert abs(unimodular_identity_residual(np.exp(1j * a), np.exp(1j * b))) < 1e-12


class TestEquilibrium:
    def test_total_mass(self):
        assert abs(semicircle_measure().total_mass() - 1) < 1e-10

    @pytest.mark.parametrize("z", [-1.3, -0.5, 0.0, 0.4, 1.2, 1.4])
    def test_tail_mass(self, z):
        assert abs(semicircle_measure().tail_mass(z) - semicircle_tail_mass(z)) < 1e-10

    def test_memoized(self):
        m = semicircle_measure()
        assert m.tail_mass(0.3) == m.tail_mass(0.3)
        assert 0.3 in m._cache

    def test_generic_measure(self):
        m = EquilibriumMeasure(0.0, 1.0, lambda x: 1.5 * np.sqrt(np.clip(1 - np.asarray(x), 0, None)))
        assert abs(m.total_mass() - 1) < 1e-10
        assert m.tail_mass(0.75) == pytest.approx(0.125, abs=1e-10)


def rescaled_eta(j, n, z, k):
    # The weight exp(-n x^2) maps to exp(-y^2) under y = sqrt(n) x.
    y = math.sqrt(n) * z
    if k == 0:
        return n**0.25 * float(eta_mp(j, y))
    return n**0.75 * (math.sqrt(2 * j) * float(eta_mp(j - 1, y)) - y * float(eta_mp(j, y)))


class TestUUE:
    def test_midpoint_bound(self):
        m = semicircle_measure()
        v = uue_eta_asymptotic(m, 60, EtaIndex.N, 0, 0.0)
        assert abs(v) <= math.sqrt(2 / (2 * math.sqrt(2) * math.pi)) * 2

    def test_rescaling_oracle(self):
        m = semicircle_measure()
        got = uue_eta_asymptotic(m, 60, "n", 0, 0.4)
        ref = rescaled_eta(60, 60, 0.4, 0)
        assert abs(got / ref - 1) < 0.15

    @pytest.mark.parametrize("index,j", [("n", 0), ("n-1", -1)])
    @pytest.mark.parametrize("k", [0, 1])
    def test_median_error_improves(self, index, j, k):
        m = semicircle_measure()
        meds = []
        for n in (60, 120, 240):
            zs = np.linspace(-1.0, 1.0, 41)
            env = math.sqrt(2 / (2 * math.sqrt(2) * math.pi)) * (n * math.pi * m.density(zs)) ** k
            errs = [abs(uue_eta_asymptotic(m, n, index, k, z) - rescaled_eta(n + j, n, z, k)) / e for z, e in zip(zs, env)]
            meds.append(float(np.median(errs)))
        assert meds[0] > meds[1] > meds[2]
        assert meds[2] < 0.01

    def test_derivative_is_derivative(self):
        m = semicircle_measure()
        n, z = 60, 0.3
        h = 1e-4 / n
        fd = (uue_eta_asymptotic(m, n, "n", 0, z + h) - uue_eta_asymptotic(m, n, "n", 0, z - h)) / (2 * h)
        d1 = uue_eta_asymptotic(m, n, "n", 1, z)
        assert abs(d1 - fd) < 0.05 * abs(d1)

    def test_domain(self):
        with pytest.raises(DomainError):
            uue_eta_asymptotic(semicircle_measure(), 10, "n", 0, 1.4)
