import numpy as np
import pytest

from wzphase.connection import (ConnectionCoeffs, TangentSample, connection_forms,
                                fd_connection_oracle, pullback)
from wzphase.degeneracy import Canonical, CaseLabel
from wzphase.errors import NumericalError, ValidationError
from wzphase.loops import AngleSeries, CanonicalLoop, FourierSeries

from conftest import random_canonical, random_direction

ALL_CASES = (CaseLabel.CASE1, CaseLabel.CASE2, CaseLabel.CASE3, CaseLabel.CASE4)


def coeff_arrays(cf: ConnectionCoeffs):
    return (np.array([cf.a1_gamma, cf.a1_theta, cf.a1_ratio]),
            np.stack([cf.a2_gamma, cf.a2_theta, cf.a2_ratio]))


class TestClosedForms:
    def test_case1_symmetric_point(self):
        cf = connection_forms(Canonical(1, 1, 1, 0.0, 0.0), CaseLabel.CASE1)
        assert abs(cf.a1_gamma - 1 / 3) < 1e-15
        assert abs(cf.a1_theta + 1 / 3) < 1e-15  # -tp/E in the exact frame gauge
        assert cf.a1_ratio == 0
        w = 1 / (2 * np.sqrt(3))
        np.testing.assert_allclose(cf.a2_gamma,
                                   [[0.5, -w], [-w, 1 / 6]], atol=1e-15)
        np.testing.assert_allclose(cf.a2_theta, np.diag([0, -2 / 3]), atol=1e-15)
        np.testing.assert_allclose(cf.a2_ratio,
                                   [[0, 1j / (4 * np.sqrt(3))],
                                    [-1j / (4 * np.sqrt(3)), 0]], atol=1e-15)

    def test_case2_point(self):
        cf = connection_forms(Canonical(0, 2, 1, 0.0, 0.0), CaseLabel.CASE2)
        assert abs(cf.a1_theta + 1 / 3) < 1e-15
        np.testing.assert_allclose(cf.a2_theta, np.diag([0, -2 / 3]), atol=1e-15)
        assert cf.a1_gamma == cf.a1_ratio == 0
        assert not np.any(cf.a2_gamma) and not np.any(cf.a2_ratio)

    def test_hermiticity(self, rng):
        for label in ALL_CASES:
            for _ in range(100):
                cf = connection_forms(random_canonical(rng, label), label)
                for M in (cf.a2_gamma, cf.a2_theta, cf.a2_ratio):
                    assert np.max(np.abs(M - M.conj().T)) <= 1e-14

    def test_scale_invariance(self, rng):
        for label in ALL_CASES:
            c = random_canonical(rng, label)
            base1, base2 = coeff_arrays(connection_forms(c, label))
            for lam in (0.5, 2.0, 10.0):
                cs = Canonical(lam * c.rp, lam * c.sp, lam * c.tp,
                               c.gamma, c.theta, c.sign, c.e2)
                s1, s2 = coeff_arrays(connection_forms(cs, label))
                if lam in (0.5, 2.0):  # power-of-two scaling is bit-exact
                    np.testing.assert_array_equal(s1, base1)
                    np.testing.assert_array_equal(s2, base2)
                else:
                    np.testing.assert_allclose(s1, base1, rtol=1e-13, atol=1e-16)
                    np.testing.assert_allclose(s2, base2, rtol=1e-13, atol=1e-16)

    def test_sign_branch_does_not_enter(self, rng):
        c = random_canonical(rng)
        cm = Canonical(c.rp, c.sp, c.tp, c.gamma, c.theta, -1, c.e2)
        a, b = coeff_arrays(connection_forms(c, CaseLabel.CASE1))
        am, bm = coeff_arrays(connection_forms(cm, CaseLabel.CASE1))
        np.testing.assert_array_equal(a, am)
        np.testing.assert_array_equal(b, bm)

    def test_rejects_misrouted_case(self):
        with pytest.raises(ValidationError):
            connection_forms(Canonical(1, 1, 1, 0.0, 0.0), CaseLabel.CASE2)


class TestOracleAgreement:
    def test_all_cases(self, rng):
        for label in ALL_CASES:
            worst = 0.0
            for _ in range(100):
                c = random_canonical(rng, label)
                d = random_direction(rng, label)
                tan = TangentSample.from_raw(c, *d)
                cf = connection_forms(c, label)
                a1o, a2o = fd_connection_oracle(c, label, tan, h=1e-4)
                worst = max(worst, abs(cf.a1(tan) - a1o),
                            float(np.max(np.abs(cf.a2(tan) - a2o))))
            assert worst <= 5e-7, (label, worst)

    def test_oracle_hermitian(self, rng):
        c = random_canonical(rng)
        tan = TangentSample.from_raw(c, *random_direction(rng))
        _, a2 = fd_connection_oracle(c, CaseLabel.CASE1, tan, h=1e-3)
        np.testing.assert_array_equal(a2, a2.conj().T)

    def test_second_order_convergence(self, rng):
        errs = {1e-3: [], 5e-4: []}
        for _ in range(100):
            c = random_canonical(rng)
            tan = TangentSample.from_raw(c, *random_direction(rng))
            cf = connection_forms(c, CaseLabel.CASE1)
            for h in errs:
                a1o, a2o = fd_connection_oracle(c, CaseLabel.CASE1, tan, h=h)
                errs[h].append(max(abs(cf.a1(tan) - a1o),
                                   float(np.max(np.abs(cf.a2(tan) - a2o)))))
        ratio = np.mean(errs[1e-3]) / np.mean(errs[5e-4])
        assert 3.5 <= ratio <= 4.5, ratio

    def test_amplitude_only_directions_give_zero(self, rng):
        # Case2 frames vary with (sp, tp) only through real normalizations,
        # so the connection vanishes on dtheta = 0 directions
        c = random_canonical(rng, CaseLabel.CASE2)
        tan = TangentSample.from_raw(c, 0.0, 0.7, -0.4, 0.0, 0.0)
        cf = connection_forms(c, CaseLabel.CASE2)
        assert cf.a1(tan) == 0 and not np.any(cf.a2(tan))
        a1o, a2o = fd_connection_oracle(c, CaseLabel.CASE2, tan, h=1e-4)
        assert abs(a1o) <= 1e-8 and np.max(np.abs(a2o)) <= 1e-8

    def test_no_other_ratio_differentials(self, rng):
        # a pure d(tp) direction keeps sp/rp fixed: the response must vanish
        c = random_canonical(rng, CaseLabel.CASE1)
        tan = TangentSample.from_raw(c, 0.0, 0.0, 1.0, 0.0, 0.0)
        cf = connection_forms(c, CaseLabel.CASE1)
        assert cf.a1(tan) == 0 and not np.any(cf.a2(tan))
        a1o, a2o = fd_connection_oracle(c, CaseLabel.CASE1, tan, h=1e-4)
        assert abs(a1o) <= 1e-8 and np.max(np.abs(a2o)) <= 1e-8

    def test_rejects_region_exit(self):
        c = Canonical(0.1, 1.0, 1.0, 0.0, 0.0)
        tan = TangentSample.from_raw(c, 1.0, 0.0, 0.0, 0.0, 0.0)
        with pytest.raises(ValidationError):
            fd_connection_oracle(c, CaseLabel.CASE1, tan, h=0.5)

    def test_rejects_zero_pattern_motion(self):
        c = Canonical(0.0, 1.0, 1.0, 0.0, 0.0)
        tan = TangentSample(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        with pytest.raises(ValidationError):
            fd_connection_oracle(c, CaseLabel.CASE2, tan, h=1e-4)

    def test_rejects_giant_step(self):
        c = Canonical(1.0, 1.0, 1.0, 0.0, 0.0)
        tan = TangentSample.from_raw(c, 0.0, 0.0, 0.0, 1.0, 0.0)
        with pytest.raises(NumericalError):
            fd_connection_oracle(c, CaseLabel.CASE1, tan, h=2 * np.pi)


class TestPullback:
    def loop(self):
        return CanonicalLoop(T=2.0,
                             rp=FourierSeries(const=1), sp=FourierSeries(const=1),
                             tp=FourierSeries(const=1), gamma=AngleSeries(),
                             theta=AngleSeries(winding=1))

    def test_theta_loop_values(self):
        a1, a2 = pullback(self.loop(), 0.25)
        rate = 2 * np.pi / 2.0
        assert abs(a1 + rate / 3) < 1e-13  # -tp/E coefficient in the frame gauge
        np.testing.assert_allclose(a2, np.diag([0, -2 / 3 * rate]), atol=1e-13)

    def test_constant_loop_vanishes(self):
        loop = CanonicalLoop(T=1.0, rp=FourierSeries(const=1),
                             sp=FourierSeries(const=2), tp=FourierSeries(const=3),
                             gamma=AngleSeries(), theta=AngleSeries())
        a1, a2 = pullback(loop, 0.3)
        assert a1 == 0 and not np.any(a2)

    def test_case2_theta_loop(self):
        loop = CanonicalLoop(T=1.0, rp=FourierSeries(), sp=FourierSeries(const=2),
                             tp=FourierSeries(const=1), gamma=AngleSeries(),
                             theta=AngleSeries(winding=1))
        a1, _ = pullback(loop, 0.6)
        assert abs(a1 + (1 / 3) * 2 * np.pi) < 1e-13

    def test_batch_matches_pointwise(self, rng):
        loop = CanonicalLoop(T=1.0,
                             rp=FourierSeries(const=1, cos=(0.2,)),
                             sp=FourierSeries(const=1.5, sin=(0.3,)),
                             tp=FourierSeries(const=0.8),
                             gamma=AngleSeries(sin=(0.4,)),
                             theta=AngleSeries(winding=1))
        ts = rng.uniform(0, 1, 20)
        a1b, a2b = loop.connection_batch(ts)
        for k, t in enumerate(ts):
            a1, a2 = pullback(loop, float(t))
            assert abs(a1 - a1b[k]) < 1e-13
            np.testing.assert_allclose(a2, a2b[k], atol=1e-13)
