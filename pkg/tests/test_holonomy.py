import numpy as np
import pytest

from wzphase.degeneracy import CaseLabel
from wzphase.errors import ValidationError
from wzphase.holonomy import (ErrorReport, dynamical_phase, exp_herm2,
                              ordered_product, path_ordered_exp,
                              schrodinger_propagator, verify_adiabatic)
from wzphase.loops import AngleSeries, CanonicalLoop, FourierSeries, Loop
from wzphase.spectral import eig3_oracle

from conftest import random_hermitian

SIGMA = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])


def case1_theta_loop(T=1.0):
    return CanonicalLoop(T, rp=FourierSeries(const=1), sp=FourierSeries(const=1),
                         tp=FourierSeries(const=1), gamma=AngleSeries(),
                         theta=AngleSeries(winding=1))


def case2_theta_loop(T=1.0):
    return CanonicalLoop(T, rp=FourierSeries(), sp=FourierSeries(const=2),
                         tp=FourierSeries(const=1), gamma=AngleSeries(),
                         theta=AngleSeries(winding=1))


def wiggly_case1_loop(T=1.0):
    return CanonicalLoop(T, rp=FourierSeries(const=1, cos=(0.3,)),
                         sp=FourierSeries(const=1.5),
                         tp=FourierSeries(const=0.8, sin=(0.2,)),
                         gamma=AngleSeries(sin=(0.4,)),
                         theta=AngleSeries(winding=1))


class PrescribedLoop(Loop):
    """Loop with hand-prescribed connection samples, for ordering tests."""

    label = CaseLabel.CASE1

    def __init__(self, T, a2_fn, a1_fn=lambda t: 0.0):
        super().__init__(T)
        self.a2_fn = a2_fn
        self.a1_fn = a1_fn

    def connection_batch(self, ts):
        a1 = np.array([self.a1_fn(t) for t in ts])
        a2 = np.stack([self.a2_fn(t) for t in ts])
        return a1, a2

    def energies_batch(self, ts):
        z = np.zeros(len(ts))
        return z, z

    def check_closed(self):
        pass


class GaugedLoop(Loop):
    """Wraps a loop in a smooth single-valued degenerate-frame gauge g(t)."""

    def __init__(self, inner, nsig, phi0):
        super().__init__(inner.T, inner.tol)
        self.inner = inner
        self.label = inner.label
        self.nsig = nsig
        self.phi0 = phi0

    def g(self, t):
        return exp_herm2(self.nsig, self.phi0 + 2 * np.pi * t / self.T)

    def connection_batch(self, ts):
        a1, a2 = self.inner.connection_batch(ts)
        phis = self.phi0 + 2 * np.pi * np.asarray(ts) / self.T
        gs = np.stack([exp_herm2(self.nsig, p) for p in phis])
        a2g = np.einsum("nba,nbc,ncd->nad", gs.conj(), a2, gs) \
            - (2 * np.pi / self.T) * self.nsig
        return a1, a2g

    def energies_batch(self, ts):
        return self.inner.energies_batch(ts)

    def check_closed(self):
        self.inner.check_closed()


class TestHelpers:
    def test_exp_herm2_is_exact(self, rng):
        for _ in range(50):
            M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            M = 0.5 * (M + M.conj().T)
            tau = float(rng.uniform(-2, 2))
            ev, V = np.linalg.eigh(M)
            expect = V @ np.diag(np.exp(1j * ev * tau)) @ V.conj().T
            np.testing.assert_allclose(exp_herm2(M, tau), expect, atol=1e-14)

    def test_exp_herm2_zero_block(self):
        np.testing.assert_array_equal(exp_herm2(np.zeros((2, 2)), 1.3), np.eye(2))

    def test_ordered_product_order(self, rng):
        mats = rng.normal(size=(5, 2, 2)) + 1j * rng.normal(size=(5, 2, 2))
        expect = mats[4] @ mats[3] @ mats[2] @ mats[1] @ mats[0]
        np.testing.assert_allclose(ordered_product(mats), expect, atol=1e-12)

    def test_ordered_product_deterministic(self, rng):
        mats = rng.normal(size=(33, 3, 3))
        np.testing.assert_array_equal(ordered_product(mats), ordered_product(mats))


class TestPathOrderedExp:
    def test_constant_loop_trivial(self):
        loop = CanonicalLoop(1.0, rp=FourierSeries(const=1), sp=FourierSeries(const=2),
                             tp=FourierSeries(const=3), gamma=AngleSeries(),
                             theta=AngleSeries())
        res = path_ordered_exp(loop, 64)
        assert abs(res.gamma1 - 1) < 1e-12
        np.testing.assert_allclose(res.gamma2, np.eye(2), atol=1e-12)

    def test_case1_analytic(self):
        res = path_ordered_exp(case1_theta_loop(), 4096)
        assert abs(res.gamma1 - np.exp(4j * np.pi / 3)) < 1e-6
        np.testing.assert_allclose(res.gamma2,
                                   np.diag([1, np.exp(-4j * np.pi / 3)]), atol=1e-6)

    def test_case2_analytic(self):
        res = path_ordered_exp(case2_theta_loop(), 4096)
        assert abs(res.gamma1 - np.exp(-2j * np.pi / 3)) < 1e-6
        np.testing.assert_allclose(res.gamma2,
                                   np.diag([1, np.exp(-4j * np.pi / 3)]), atol=1e-6)

    def test_two_segment_ordering(self):
        M1 = np.array([[0.3, 0.1], [0.1, -0.2]], dtype=complex)
        M2 = np.array([[0.0, 0.4j], [-0.4j, 0.1]], dtype=complex)
        loop = PrescribedLoop(2.0, lambda t: M1 if t < 1.0 else M2)
        res = path_ordered_exp(loop, 64)
        expect = exp_herm2(M2, 1.0) @ exp_herm2(M1, 1.0)
        np.testing.assert_allclose(res.gamma2, expect, atol=1e-12)

    def test_unitarity(self):
        res = path_ordered_exp(wiggly_case1_loop(), 256)
        assert abs(abs(res.gamma1) - 1) < 1e-12
        assert np.linalg.norm(res.gamma2.conj().T @ res.gamma2 - np.eye(2), 2) < 1e-10

    def test_abelian_consistency(self):
        # commuting samples: the ordered product equals the plain exponential
        loop = case2_theta_loop()
        n = 512
        ts = (np.arange(n) + 0.5) * (loop.T / n)
        _, a2 = loop.connection_batch(ts)
        res = path_ordered_exp(loop, n)
        np.testing.assert_allclose(res.gamma2,
                                   exp_herm2(np.sum(a2, axis=0), loop.T / n), atol=1e-10)

    def test_convergence_second_order(self):
        # gauged Abelian loop: exact answer known, samples non-commuting
        nhat = np.array([0.6, 0.0, 0.8])
        nsig = np.einsum("i,iab->ab", nhat, SIGMA)
        base = case2_theta_loop()
        loop = GaugedLoop(base, nsig, phi0=0.35)
        g0 = exp_herm2(nsig, 0.35)
        exact = g0.conj().T @ path_ordered_exp(base, 8192).gamma2 @ g0
        errs = [np.linalg.norm(path_ordered_exp(loop, n).gamma2 - exact, 2)
                for n in (256, 512, 1024)]
        for e0, e1 in zip(errs, errs[1:]):
            assert 3.0 <= e0 / e1 <= 5.0, errs

    def test_rejects_open_loop(self):
        base = wiggly_case1_loop()

        class OpenLoop(Loop):
            label = base.label

            def __init__(self):
                super().__init__(base.T)

            def matrix_batch(self, ts):
                return np.stack([np.diag([1, 2, 3 + t]).astype(complex) for t in ts])

        with pytest.raises(ValidationError):
            path_ordered_exp(OpenLoop(), 64)

    def test_rejects_tiny_step_count(self):
        with pytest.raises(ValidationError):
            path_ordered_exp(case1_theta_loop(), 1)


class TestGapSignBranch:
    def test_geometric_factors_ignore_gap_sign(self):
        # frames depend only on the canonical shape, so flipping the gap
        # sign changes dynamical phases but not the geometric ones
        kw = dict(rp=FourierSeries(const=1), sp=FourierSeries(const=1.5),
                  tp=FourierSeries(const=0.8), gamma=AngleSeries(sin=(0.3,)),
                  theta=AngleSeries(winding=1))
        rp = path_ordered_exp(CanonicalLoop(1.0, sign=1, **kw), 1024)
        rm = path_ordered_exp(CanonicalLoop(1.0, sign=-1, **kw), 1024)
        np.testing.assert_array_equal(rp.gamma2, rm.gamma2)
        assert rp.gamma1 == rm.gamma1
        assert abs(rp.dyn1 - rm.dyn1) > 0.1


class TestDynamicalPhase:
    def test_constant_energy(self):
        loop = case2_theta_loop(T=2.0)
        # simple level sits at gap 3 above the degenerate one
        assert abs(dynamical_phase(loop, 1, 512) - np.exp(-3j * 2.0)) < 1e-10

    def test_shifted_degenerate_level_is_unity(self):
        assert dynamical_phase(case2_theta_loop(), 2, 64) == 1.0

    def test_linear_ramp(self):
        loop = PrescribedLoop(1.0, lambda t: np.zeros((2, 2)))
        loop.energies_batch = lambda ts: (2.0 * np.asarray(ts), np.zeros(len(ts)))
        # E1(t) = 2t over [0,1]: integral is 1
        assert abs(dynamical_phase(loop, 1, 4096) - np.exp(-1j)) < 1e-8

    def test_bad_level(self):
        with pytest.raises(ValidationError):
            dynamical_phase(case2_theta_loop(), 3, 64)


class TestSchrodinger:
    def test_zero_hamiltonian(self):
        loop = PrescribedLoop(1.0, lambda t: np.zeros((2, 2)))
        loop.matrix_batch = lambda ts: np.zeros((len(ts), 3, 3), dtype=complex)
        np.testing.assert_array_equal(schrodinger_propagator(loop, 64), np.eye(3))

    def test_constant_diagonal(self):
        loop = PrescribedLoop(1.0, lambda t: np.zeros((2, 2)))
        loop.matrix_batch = lambda ts: np.broadcast_to(
            np.diag([1.0, 0.5, 0.5]).astype(complex), (len(ts), 3, 3)).copy()
        U = schrodinger_propagator(loop, 256)
        np.testing.assert_allclose(
            U, np.diag(np.exp(-1j * np.array([1.0, 0.5, 0.5]))), atol=1e-11)

    def test_constant_random_matches_eigendecomposition(self, rng):
        H = random_hermitian(rng)
        loop = PrescribedLoop(1.0, lambda t: np.zeros((2, 2)))
        loop.matrix_batch = lambda ts: np.broadcast_to(H, (len(ts), 3, 3)).copy()
        U = schrodinger_propagator(loop, 512)
        ev, V = eig3_oracle(H)
        expect = V @ np.diag(np.exp(-1j * ev)) @ V.conj().T
        np.testing.assert_allclose(U, expect, atol=1e-10)

    def test_unitarity(self):
        U = schrodinger_propagator(wiggly_case1_loop(T=5.0), 4096)
        assert np.linalg.norm(U.conj().T @ U - np.eye(3), 2) < 1e-11

    def test_step_size_guard(self):
        with pytest.raises(ValidationError):
            schrodinger_propagator(case1_theta_loop(T=100.0), 64)


class TestVerifyAdiabatic:
    def test_errors_shrink_with_T(self):
        reports = verify_adiabatic(case2_theta_loop(), [50.0, 200.0], 20000)
        assert reports[0].unitary_distance > reports[1].unitary_distance
        assert reports[0].subspace_leakage > reports[1].subspace_leakage
        assert reports[1].unitary_distance < 0.05

    def test_constant_hamiltonian_loop(self):
        loop = CanonicalLoop(1.0, rp=FourierSeries(const=1), sp=FourierSeries(const=2),
                             tp=FourierSeries(const=3), gamma=AngleSeries(),
                             theta=AngleSeries())
        reports = verify_adiabatic(loop, [5.0], 2048)
        assert reports[0].unitary_distance < 1e-9
        assert reports[0].subspace_leakage < 1e-12

    def test_simple_level_phase_prediction(self):
        # the simulated (0,0) frame-basis entry matches dyn1 * gamma1,
        # pinning the sign convention of the simple-level connection
        from wzphase.holonomy import dynamical_phase, schrodinger_propagator
        from wzphase.spectral import frame

        loop = case2_theta_loop()
        T = 600.0
        loop_T = loop.with_duration(T)
        U = schrodinger_propagator(loop_T, 60000)
        s0 = loop.sample(0.0)
        F0 = frame(s0.canonical, s0.label).matrix()
        W = F0.conj().T @ U @ F0
        hol = path_ordered_exp(loop, 4096)
        dyn1 = dynamical_phase(loop_T, 1, 4096)
        predicted = dyn1 * hol.gamma1
        assert abs(W[0, 0] - predicted) < 0.02
        # the conjugate-sign convention would be off by order one
        assert abs(W[0, 0] - dyn1 * np.conj(hol.gamma1)) > 1.0

    def test_report_validation(self):
        with pytest.raises(ValidationError):
            ErrorReport(1.0, -0.1, 0.0, 8)


class TestInvariances:
    def test_reparameterization(self):
        from wzphase.loops import ParamsLoop
        base = wiggly_case1_loop()
        fn = base.params_at
        T = base.T
        warped = ParamsLoop(
            lambda t: fn(t - 0.25 * T * np.sin(2 * np.pi * t / T) / (2 * np.pi)), T)
        r1 = path_ordered_exp(base, 4096)
        r2 = path_ordered_exp(warped, 4096)
        assert abs(r1.gamma1 - r2.gamma1) <= 1e-8
        assert np.linalg.norm(r1.gamma2 - r2.gamma2, 2) <= 1e-8

    def test_gauge_covariance(self):
        nhat = np.array([0.36, 0.48, 0.8])
        nhat /= np.linalg.norm(nhat)
        nsig = np.einsum("i,iab->ab", nhat, SIGMA)
        base = wiggly_case1_loop()
        phi0 = 0.7
        n = 32768
        r = path_ordered_exp(base, n)
        rg = path_ordered_exp(GaugedLoop(base, nsig, phi0), n)
        g0 = exp_herm2(nsig, phi0)
        np.testing.assert_allclose(rg.gamma2, g0.conj().T @ r.gamma2 @ g0, atol=1e-8)
        ev = np.sort(np.angle(np.linalg.eigvals(r.gamma2)))
        evg = np.sort(np.angle(np.linalg.eigvals(rg.gamma2)))
        np.testing.assert_allclose(ev, evg, atol=1e-8)
