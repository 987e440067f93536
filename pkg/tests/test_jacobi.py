import numpy as np
import pytest

from baroflow import burgers, geodesic, jacobi
from baroflow.errors import DomainError
from baroflow.grids import CircleGrid, ScalarField, VectorField
from baroflow.pressure import polytropic

GAMMA3 = polytropic(1 / 3, 3.0)


def constant_background(n=128):
    g = CircleGrid(n)
    return geodesic.barotropic_initializer(
        VectorField(g, np.ones((1, n))), ScalarField(g, np.ones(n)), GAMMA3), g


def sine_background(n=128, amp=0.5):
    g = CircleGrid(n)
    return geodesic.barotropic_initializer(
        VectorField(g, (amp * np.sin(g.x))[None]), ScalarField(g, np.ones(n)), GAMMA3), g


class TestLinearizedStep:
    def test_zero_perturbation_stays_zero(self):
        state, g = sine_background(64)
        v0 = VectorField(g, np.zeros((1, g.n)))
        traj = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0),
                                           GAMMA3, t_end=0.5, dt=0.01)
        last = traj.jstates[-1]
        for arr in (last.v.values, last.sigma.values, last.j.values, last.G.values):
            assert np.max(np.abs(arr)) == 0.0

    @pytest.mark.parametrize("n_mode", [1, 2, 3])
    def test_constant_background_closed_forms(self, n_mode):
        state, g = constant_background(128)
        v0 = VectorField(g, np.cos(n_mode * g.x)[None])
        t_end = 2.0
        traj = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0),
                                           GAMMA3, t_end, dt=0.005)
        last = traj.jstates[-1]
        j_expect = burgers.conjugate_j(n_mode, t_end, g.x)
        G_expect = burgers.conjugate_G(n_mode, t_end, g.x)
        assert np.max(np.abs(last.j.values[0] - j_expect)) < 1e-6
        assert np.max(np.abs(last.G.values - G_expect)) < 1e-6

    def test_general_background_matches_exact_jacobi(self):
        state, g = sine_background(128, amp=0.5)
        v0_vals = np.cos(2 * g.x) + 0.5 * np.sin(3 * g.x)
        v0 = VectorField(g, v0_vals[None])
        t_end = 1.0  # shock time is 2 for this background
        traj = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0),
                                           GAMMA3, t_end, dt=0.005)
        exact = burgers.exact_jacobi(ScalarField(g, 0.5 * np.sin(g.x)),
                                     ScalarField(g, np.ones(g.n)),
                                     ScalarField(g, v0_vals), t_end)
        assert np.max(np.abs(traj.jstates[-1].j.values - exact.values)) < 1e-5

    def test_constraint_preservation(self):
        state, g = sine_background(128, amp=0.5)
        v0 = VectorField(g, (np.cos(2 * g.x))[None])
        traj = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0),
                                           GAMMA3, t_end=1.0, dt=0.005,
                                           store_every=20)
        for js, st in zip(traj.jstates, traj.states):
            assert jacobi.constraint_residual(js, st) < 1e-6

    def test_linearity(self):
        state, g = sine_background(64, amp=0.3)
        v0 = VectorField(g, (np.cos(2 * g.x))[None])
        v0x2 = VectorField(g, 2 * v0.values)
        t1 = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0),
                                         GAMMA3, 0.8, 0.01, store_every=10)
        t2 = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0x2),
                                         GAMMA3, 0.8, 0.01, store_every=10)
        for a, b in zip(t1.jstates, t2.jstates):
            for fa, fb in ((a.v, b.v), (a.sigma, b.sigma), (a.j, b.j), (a.G, b.G)):
                scale = np.max(np.abs(fb.values)) + 1e-300
                assert np.max(np.abs(2 * fa.values - fb.values)) / scale < 1e-10


class TestDeviationOracle:
    def test_zero_perturbation(self):
        state, g = sine_background(64, amp=0.3)
        v0 = VectorField(g, np.zeros((1, g.n)))
        times, devs = jacobi.deviation_oracle(
            VectorField(g, state.u.values), state.rho, v0, GAMMA3,
            s=1e-3, t_end=0.5, dt=0.01)
        assert np.max(np.abs(devs[-1])) == 0.0

    def test_agreement_with_linearized(self):
        state, g = sine_background(128, amp=0.3)
        v0 = VectorField(g, (np.cos(2 * g.x))[None])
        t_end, dt = 0.5, 0.005
        times, devs = jacobi.deviation_oracle(
            VectorField(g, state.u.values), state.rho, v0, GAMMA3,
            s=1e-3, t_end=t_end, dt=dt)
        traj = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0),
                                           GAMMA3, t_end, dt)
        j_eta = jacobi.j_along_flow(traj.jstates[-1], traj.flowmaps[-1])
        err = np.sqrt(np.mean((devs[-1] - j_eta) ** 2))
        assert err < 1e-4

    def test_s_squared_convergence(self):
        state, g = sine_background(128, amp=0.3)
        v0 = VectorField(g, (np.cos(2 * g.x))[None])
        t_end, dt = 0.5, 0.0025
        traj = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0),
                                           GAMMA3, t_end, dt)
        j_eta = jacobi.j_along_flow(traj.jstates[-1], traj.flowmaps[-1])
        ss = [1e-2, 1e-3, 1e-4]
        errs = []
        for s in ss:
            _, devs = jacobi.deviation_oracle(
                VectorField(g, state.u.values), state.rho, v0, GAMMA3,
                s=s, t_end=t_end, dt=dt)
            errs.append(np.sqrt(np.mean((devs[-1] - j_eta) ** 2)))
        slope = np.polyfit(np.log(ss), np.log(errs), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.2)


class TestGrowthReport:
    def test_constant_background_mode(self):
        state, g = constant_background(64)
        n_mode = 2
        v0 = VectorField(g, np.cos(n_mode * g.x)[None])
        traj = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0),
                                           GAMMA3, 3.0, 0.02, store_every=5)
        rep = jacobi.growth_report(traj.times, traj.jstates, v0)
        assert rep.max_ratio <= 1 + 1e-6
        # ||j(t)||_inf = |sin(nt)|/n <= 1/n, far below t except near t=0
        last = traj.jstates[-1]
        t_last = traj.times[-1]
        assert np.max(np.abs(last.j.values)) / t_last < 0.2

    def test_growth_bound_seeded_suite(self):
        n = 64
        g = CircleGrid(n)
        for seed in range(50):
            rng = np.random.Generator(np.random.Philox(key=200, counter=seed))
            u0vals = np.zeros(n)
            v0vals = np.zeros(n)
            for k in range(1, 5):
                a, b, c, d = rng.standard_normal(4)
                u0vals += 0.3 * (a * np.cos(k * g.x) + b * np.sin(k * g.x)) / k
                v0vals += c * np.cos(k * g.x) + d * np.sin(k * g.x)
            u0 = ScalarField(g, u0vals)
            rho0 = ScalarField(g, np.ones(n))
            inv = burgers.riemann_invariants(u0, rho0)
            tshock = min(burgers.shock_time(inv.alpha_plus),
                         burgers.shock_time(inv.alpha_minus))
            state = geodesic.barotropic_initializer(VectorField(g, u0vals[None]), rho0, GAMMA3)
            t_end = 0.8 * min(tshock, 5.0)
            dt = min(0.9 * geodesic.cfl_dt_max(state, GAMMA3), 0.02)
            traj = jacobi.integrate_linearized(
                state, jacobi.initial_jacobi(VectorField(g, v0vals[None])),
                GAMMA3, t_end, dt, store_every=10)
            rep = jacobi.growth_report(traj.times, traj.jstates,
                                       VectorField(g, v0vals[None]))
            assert rep.max_ratio <= 1 + 1e-6, f"seed {seed}"

    def test_zero_v0(self):
        state, g = constant_background(64)
        v0 = VectorField(g, np.zeros((1, g.n)))
        traj = jacobi.integrate_linearized(state, jacobi.initial_jacobi(v0),
                                           GAMMA3, 0.5, 0.02)
        rep = jacobi.growth_report(traj.times, traj.jstates, v0)
        assert rep.max_ratio == 0.0 and rep.growth_rate == 0.0

    def test_empty_series_rejected(self):
        state, g = constant_background(64)
        v0 = VectorField(g, np.zeros((1, g.n)))
        with pytest.raises(DomainError):
            jacobi.growth_report([], [], v0)


class TestConjugateDetection:
    def test_first_zeros_mode2(self):
        state, g = constant_background(64)
        v0 = VectorField(g, np.cos(2 * g.x)[None])
        zeros = jacobi.detect_conjugate_times(state, v0, GAMMA3,
                                              t_max=6.5, dt=0.01)
        expect = burgers.conjugate_times(2, 2)  # pi, 2 pi
        assert len(zeros) >= 2
        for z, e in zip(zeros[:2], expect):
            assert abs(z - e) < 1e-6
