import math

import numpy as np
import pytest

from kortorus.errors import (
    DeltaOutOfRange,
    PExponentOutOfRange,
    ScalingPairInvalid,
)
from kortorus.functionals import (
    MonitorSpec,
    VerdictThresholds,
    bd_entropy,
    blow_up_verdict,
    effective_energy,
    effective_energy_dissipation,
    energy,
    evaluate_report,
    integrability_functional,
    mv_entropy,
    quartic_forms,
    serrin_accumulator,
    vacuum_functional,
    vacuum_indicator,
)
from kortorus.model import FieldState, ModelParams, effective_velocity
from kortorus.scenarios import density_corpus, initial_state, velocity_corpus
from kortorus.spectral import ScalarField, SpectralGrid, VectorField, integrate
from kortorus.timestepping import IntegratorConfig, Trajectory, run
from helpers import dense_quadrature_1d, max_abs

TAU = 2.0 * math.pi
P_V2 = ModelParams(mu=1.0, alpha=0.0, kappa=1.0, a=1.0, gamma=2.0, variant="effective_v2")
P_ORIG = ModelParams(mu=1.0, alpha=0.4, kappa=0.8, a=1.0, gamma=2.0, variant="original")


def state_1d(rho_fn, v_fn=None, grid=None):
    grid = grid or SpectralGrid(128)
    rho = grid.from_function(rho_fn)
    if v_fn is None:
        w = grid.zero_vector()
    else:
        w = VectorField(grid, grid.from_function(v_fn).data[None])
    return FieldState(rho, w)


class TestEnergy:
    def test_rest_state_pressure_only(self):
        st = state_1d(lambda x: np.ones_like(x))
        en = energy(st, P_V2)
        assert en.kinetic == pytest.approx(0.0)
        assert en.capillary == pytest.approx(0.0)
        assert en.pressure == pytest.approx(TAU)
        assert en.total == pytest.approx(TAU)

    def test_constant_velocity_2d(self):
        grid = SpectralGrid((32, 32))
        w = VectorField(grid, np.stack([np.ones(grid.shape), np.zeros(grid.shape)]))
        st = FieldState(grid.constant(1.0), w)
        en = energy(st, P_ORIG)
        assert en.kinetic == pytest.approx(grid.volume)

    def test_capillary_two_assemblies(self):
        # kappa int |grad sqrt(rho)|^2 == kappa int (rho/4) |grad ln rho|^2
        grid = SpectralGrid(256)
        st = state_1d(lambda x: np.exp(np.sin(x)), grid=grid)
        en = energy(st, P_V2)
        from kortorus.spectral import gradient
        ln = ScalarField(grid, np.log(st.rho.data))
        alt = P_V2.kappa * integrate(ScalarField(
            grid, 0.25 * st.rho.data * np.sum(gradient(ln).data ** 2, axis=0)))
        assert abs(en.capillary - alt) < 1e-10 * max(1.0, abs(alt))

    def test_change_of_variables_consistency(self):
        # the same physical state measured through (rho, u) or through the
        # effective state (rho, v) gives identical numbers
        grid = SpectralGrid(128)
        rho = density_corpus(grid, 1, seed=1, lo=1.0, hi=2.0)[0]
        u = velocity_corpus(grid, 1, seed=2)[0]
        p1 = ModelParams(mu=1.0, alpha=0.5, kappa=0.5, a=1.0, gamma=2.0,
                         variant="effective_v1")
        en_orig = energy(FieldState(rho, u), p1.with_variant("original"))
        v = effective_velocity(rho, u, p1)
        en_eff = energy(FieldState(rho, v), p1)
        assert abs(en_orig.total - en_eff.total) < 1e-10 * en_orig.total

    def test_gamma_one_uses_potential(self):
        params = ModelParams(mu=1.0, alpha=0.0, kappa=1.0, a=1.0, gamma=1.0)
        st = state_1d(lambda x: np.ones_like(x))
        assert energy(st, params).pressure == pytest.approx(0.0)


class TestBDEntropy:
    def test_equilibrium_rates_vanish(self):
        st = state_1d(lambda x: np.ones_like(x) * 1.4)
        bd = bd_entropy(st, P_V2)
        assert bd.viscous_rate == pytest.approx(0.0)
        assert bd.cross_rate == pytest.approx(0.0)
        assert bd.capillary_rate == pytest.approx(0.0)

    def test_cross_term_direct_quadrature(self):
        grid = SpectralGrid(128)
        st = state_1d(lambda x: 1.0 + 0.2 * np.sin(x), grid=grid)
        bd = bd_entropy(st, P_V2)
        from kortorus.spectral import gradient
        direct = P_V2.a * P_V2.gamma * integrate(ScalarField(
            grid, st.rho.data ** (P_V2.gamma - 2.0)
            * np.sum(gradient(st.rho).data ** 2, axis=0)))
        assert abs(bd.cross_rate - direct) < 1e-12 * max(1.0, direct)
        assert bd.cross_rate >= 0.0

    def test_capillary_rate_scalar_quadrature(self):
        # rho = exp(eps sin x): kappa int rho (d_xx ln rho)^2
        #     = kappa eps^2 int e^{eps sin x} sin^2 x dx
        eps = 0.3
        grid = SpectralGrid(256)
        st = state_1d(lambda x: np.exp(eps * np.sin(x)), grid=grid)
        bd = bd_entropy(st, P_V2)
        oracle = P_V2.kappa * eps ** 2 * dense_quadrature_1d(
            lambda x: np.exp(eps * np.sin(x)) * np.sin(x) ** 2, TAU)
        assert abs(bd.capillary_rate - oracle) < 1e-8 * oracle

    def test_dissipation_terms_nonnegative(self):
        grid = SpectralGrid(64)
        for seed in range(3):
            rho = density_corpus(grid, 1, seed=seed, lo=1.0, hi=2.5)[0]
            w = velocity_corpus(grid, 1, seed=seed + 50)[0]
            bd = bd_entropy(FieldState(rho, w), P_V2)
            assert bd.viscous_rate >= 0.0
            assert bd.cross_rate >= 0.0
            assert bd.capillary_rate >= 0.0


class TestMVEntropy:
    def test_zero_velocity(self):
        st = state_1d(lambda x: 1.0 + 0.1 * np.sin(x))
        mv = mv_entropy(st, P_V2, 0.5)
        assert mv.value == pytest.approx(0.0)
        assert mv.dissipation_rate == pytest.approx(0.0)
        assert mv.rhs_bound == pytest.approx(0.0)

    def test_constant_velocity_formula(self):
        delta = 0.5
        grid = SpectralGrid(64)
        c = 2.0
        st = FieldState(grid.constant(1.0),
                        VectorField(grid, np.full((1,) + grid.shape, c)))
        mv = mv_entropy(st, P_V2, delta)
        assert mv.value == pytest.approx(TAU * c ** (2 + delta) / (2 + delta))
        assert mv.dissipation_rate == pytest.approx(0.0)

    def test_delta_range(self):
        st = state_1d(lambda x: np.ones_like(x))
        for bad in (0.0, 2.0, -0.5, 2.5):
            with pytest.raises(DeltaOutOfRange):
                mv_entropy(st, P_V2, bad)

    def test_refinement_residual_first_order(self):
        # along a discrete trajectory the rate-form inequality
        # (M_{k+1} - M_k)/dt + dissipation <= rhs_bound + residual
        # holds with residual -> 0 at first order in dt
        grid = SpectralGrid(64)
        st = initial_state(grid, "random_smooth",
                           {"mean": 1.2, "amplitude": 0.25,
                            "velocity_amplitude": 0.3, "modes": 3}, seed=3)
        residuals = []
        for dt in (4e-3, 2e-3):
            cfg = IntegratorConfig(dt_initial=dt, dt_min=1e-12, t_end=0.5,
                                   adaptive=False)
            traj = run(st, P_V2, cfg)
            viol = []
            for k in range(len(traj.reports) - 1):
                r0, r1 = traj.reports[k], traj.reports[k + 1]
                step = traj.step_times[k + 1] - traj.step_times[k]
                lhs = (r1.mv_value - r0.mv_value) / step + r0.mv_rate_dissipation
                viol.append(lhs - r0.mv_rhs_bound)
            residuals.append(max(0.0, max(viol)))
        assert residuals[1] <= 0.5 * residuals[0] + 1e-12


class TestIntegrability:
    def test_zero_velocity(self):
        st = state_1d(lambda x: 1.0 + 0.1 * np.sin(x))
        out = integrability_functional(st, P_V2, 4.0)
        assert out.value == pytest.approx(0.0)
        assert out.grad_rate == pytest.approx(0.0)
        assert out.quartic_rate == pytest.approx(0.0)

    def test_two_quartic_assemblies_agree(self):
        grid = SpectralGrid((64, 64))
        w = VectorField(grid, np.stack([
            np.sin(grid.meshgrid()[0]), np.zeros(grid.shape)]))
        st = FieldState(grid.constant(1.0), w)
        out = integrability_functional(st, P_V2, 4.0)
        assert abs(out.quartic_rate - out.quartic_rate_identity) \
            < 1e-12 * max(1.0, abs(out.quartic_rate))

    def test_quartic_forms_pointwise_identity(self):
        grid = SpectralGrid((64, 64))
        for v in velocity_corpus(grid, 3, seed=4, amplitude=1.0, kmax=4):
            direct, identity = quartic_forms(v)
            assert max_abs(direct - identity) < 1e-12

    def test_p_range(self):
        st = state_1d(lambda x: np.ones_like(x))
        with pytest.raises(PExponentOutOfRange):
            integrability_functional(st, P_V2, 2.0)

    def test_p3_handles_velocity_zeros(self):
        # |v|^{p-4} is singular at zeros of v for p < 4; the weighted rates
        # stay finite because the quartic forms vanish quadratically there
        st = state_1d(lambda x: 1.0 + 0.1 * np.sin(x), v_fn=np.sin)
        out = integrability_functional(st, P_V2, 3.0)
        assert math.isfinite(out.quartic_rate)
        assert out.quartic_rate >= 0.0

    def test_sup_bound_constant_stable_under_refinement(self):
        # sup_t A(t) <= C (1 + sqrt(T) (sup_t A)^{1-1/p} ||rho||^{1/p})
        # with the fitted C stable when dt is halved
        from kortorus.functionals import integrability_accumulated

        grid = SpectralGrid(64)
        st = initial_state(grid, "random_smooth",
                           {"mean": 1.2, "amplitude": 0.2,
                            "velocity_amplitude": 0.4, "modes": 3}, seed=5)
        p = 4.0
        T = 0.5
        consts = []
        for dt in (4e-3, 2e-3):
            cfg = IntegratorConfig(dt_initial=dt, dt_min=1e-12, t_end=T,
                                   adaptive=False)
            traj = run(st, P_V2, cfg)
            a_series = integrability_accumulated(traj, P_V2, p)
            sup_a = float(np.max(a_series))
            mass_sup = max(r.mass for r in traj.reports)
            bound = 1.0 + math.sqrt(T) * sup_a ** (1.0 - 1.0 / p) * mass_sup ** (1.0 / p)
            consts.append(sup_a / bound)
        assert all(math.isfinite(c) for c in consts)
        assert max(consts) / min(consts) < 2.0


class TestVacuumFunctional:
    def test_unit_density(self):
        st = state_1d(lambda x: np.ones_like(x))
        out = vacuum_functional(st, P_V2, 2.0)
        assert out.value == pytest.approx(TAU)
        assert out.rate == pytest.approx(0.0)
        assert out.identity_residual == pytest.approx(0.0)

    def test_identity_residual_smooth_density(self):
        grid = SpectralGrid(256)
        st = state_1d(lambda x: 2.0 + np.sin(x), grid=grid)
        out = vacuum_functional(st, P_V2, 3.0)
        assert out.identity_residual < 1e-8

    def test_identity_residual_spectral_convergence(self):
        resids = []
        for res in (32, 64):
            grid = SpectralGrid(res)
            rho = density_corpus(grid, 1, seed=6, lo=1.0, hi=3.0)[0]
            st = FieldState(rho, grid.zero_vector())
            resids.append(vacuum_functional(st, P_V2, 3.0).identity_residual)
        assert resids[1] < resids[0] / 100.0

    def test_monotone_in_vacuum_depth(self):
        grid = SpectralGrid(128)
        values = []
        for squeeze in (0.5, 0.7, 0.9):
            st = state_1d(lambda x: 1.0 + squeeze * np.sin(x), grid=grid)
            values.append(vacuum_functional(st, P_V2, 2.0).value)
        assert values[0] < values[1] < values[2]

    def test_p_range(self):
        st = state_1d(lambda x: np.ones_like(x))
        with pytest.raises(PExponentOutOfRange):
            vacuum_functional(st, P_V2, 1.5)


class TestSerrin:
    def _trajectory(self, fields, times, params=P_V2):
        states = [FieldState(f.rho, f.w, time=t) for f, t in zip(fields, times)]
        return Trajectory(params=params, states=states,
                          step_times=list(times))

    def test_zero_velocity(self):
        st = state_1d(lambda x: np.ones_like(x))
        traj = self._trajectory([st, st, st], [0.0, 0.5, 1.0])
        traj.states = [FieldState(s.rho, s.w, t)
                       for s, t in zip(traj.states, [0.0, 0.5, 1.0])]
        assert serrin_accumulator(traj, 4.0, 2.0) == pytest.approx(0.0)

    def test_constant_velocity_formula(self):
        grid = SpectralGrid(64)
        c, T = 1.5, 2.0
        st = FieldState(grid.constant(1.0),
                        VectorField(grid, np.full((1,) + grid.shape, c)))
        times = [0.0, 0.4, 1.1, T]
        traj = self._trajectory([st] * 4, times)
        # ||v||_Lq = c |T^1|^{1/q}; accumulated over [0, T]
        q = 2.0
        expected = (c * TAU ** (1 / q)) ** 4.0 * T
        assert serrin_accumulator(traj, 4.0, q) == pytest.approx(expected, rel=1e-12)

    def test_quadrature_oracle_2d(self):
        grid = SpectralGrid((32, 32))
        params = P_V2
        times = [0.0, 0.3, 0.8, 1.0]
        fields = []
        for k, t in enumerate(times):
            w = velocity_corpus(grid, 1, seed=30 + k, amplitude=0.5)[0]
            fields.append(FieldState(grid.constant(1.0), w, time=t))
        traj = Trajectory(params=params, states=fields, step_times=list(times))
        from kortorus.spectral import lp_norm
        norms = [lp_norm(s.w, 4.0) ** 4.0 for s in fields]
        oracle = np.trapezoid(norms, x=times)
        assert serrin_accumulator(traj, 4.0, 4.0) == pytest.approx(oracle, rel=1e-12)

    def test_scaling_validation(self):
        st = state_1d(lambda x: np.ones_like(x))
        traj = self._trajectory([st, st], [0.0, 1.0])
        with pytest.raises(ScalingPairInvalid):
            serrin_accumulator(traj, 4.0, 3.0)  # violates the N = 1 scaling
        with pytest.raises(ScalingPairInvalid):
            serrin_accumulator(traj, math.inf, 1.0)


class TestVacuumIndicator:
    def test_empty_region(self):
        st = state_1d(lambda x: np.ones_like(x))
        assert vacuum_indicator(st, 0.5, 0.1) == 0.0

    def test_constant_low_density(self):
        grid = SpectralGrid(64)
        st = FieldState(grid.constant(0.05), grid.zero_vector())
        assert vacuum_indicator(st, 0.5, 0.1) == pytest.approx(TAU * 0.05 ** -0.5)

    def test_against_dense_quadrature(self):
        grid = SpectralGrid(512)
        eps, delta = 0.01, 0.1
        rho_fn = lambda x: 0.2 + 0.19 * np.sin(x)
        st = state_1d(rho_fn, grid=SpectralGrid(512))
        val = vacuum_indicator(st, eps, delta)
        oracle = dense_quadrature_1d(
            lambda x: np.where(rho_fn(x) <= delta, rho_fn(x) ** -eps, 0.0), TAU)
        # sharp-indicator quadrature error: O(h) from the region endpoints
        h = grid.spacing[0]
        bound = 4.0 * h * delta ** -eps
        assert abs(val - oracle) < bound

    def test_parameter_validation(self):
        st = state_1d(lambda x: np.ones_like(x))
        with pytest.raises(ValueError):
            vacuum_indicator(st, -0.1, 0.1)
        with pytest.raises(ValueError):
            vacuum_indicator(st, 0.1, 1.5)


class TestEffectiveEnergy:
    def test_dissipation_nonnegative(self):
        grid = SpectralGrid(64)
        rho = density_corpus(grid, 1, seed=40, lo=1.0, hi=2.0)[0]
        w = velocity_corpus(grid, 1, seed=41)[0]
        visc, press = effective_energy_dissipation(FieldState(rho, w), P_V2)
        assert visc >= 0.0 and press >= 0.0

    def test_value_composition(self):
        grid = SpectralGrid(64)
        st = FieldState(grid.constant(1.0), grid.zero_vector())
        # Pi(1) = a/(gamma-1) = 1 over the volume
        assert effective_energy(st, P_V2) == pytest.approx(TAU)


class TestReportAndVerdict:
    def test_report_fields_finite(self):
        grid = SpectralGrid(64)
        st = initial_state(grid, "random_smooth",
                           {"mean": 1.3, "amplitude": 0.2,
                            "velocity_amplitude": 0.2}, seed=7)
        rep = evaluate_report(st, P_V2, MonitorSpec())
        assert rep.diverged == ()
        assert rep.mass == pytest.approx(integrate(st.rho))
        assert len(rep.csv_row()) == len(rep.csv_header())

    def test_monitor_serrin_default_pair(self):
        spec = MonitorSpec(serrin_p=4.0)
        assert spec.serrin_pair(1) == (4.0, pytest.approx(2.0))
        assert spec.serrin_pair(2) == (4.0, pytest.approx(4.0))

    def test_verdict_smooth_run(self):
        grid = SpectralGrid(64)
        st = initial_state(grid, "single_mode", {"mean": 1.0, "amplitude": 0.05})
        cfg = IntegratorConfig(dt_initial=5e-3, dt_min=1e-9, t_end=0.3)
        traj = run(st, P_V2, cfg)
        verdict = blow_up_verdict(traj, P_V2, VerdictThresholds())
        assert not verdict.insufficient_data
        assert verdict.serrin_pass and verdict.vacuum_pass
        assert verdict.terminated_by is None

    def test_verdict_insufficient_data(self):
        traj = Trajectory(params=P_V2)
        verdict = blow_up_verdict(traj, P_V2)
        assert verdict.insufficient_data


class TestVacuumEndpointNorm:
    def test_constant_density_closed_form(self):
        from kortorus.functionals import vacuum_endpoint_norm

        grid = SpectralGrid(64)
        c, p, k, T = 2.0, 3.0, 6.0, 1.5
        st = FieldState(grid.constant(c), grid.zero_vector())
        times = [0.0, 0.5, 1.0, T]
        states = [FieldState(st.rho, st.w, t) for t in times]
        traj = Trajectory(params=P_V2, states=states, step_times=list(times))
        # 1D parabolic family: 2/k + 1/q = 1/2 gives q = 6 at k = 6
        q = 6.0
        expected = (c ** (-(p - 1.0) / 2.0) * TAU ** (1.0 / q)) * T ** (1.0 / k)
        assert vacuum_endpoint_norm(traj, p, k) == pytest.approx(expected, rel=1e-12)

    def test_inadmissible_time_exponent(self):
        from kortorus.functionals import vacuum_endpoint_norm

        grid = SpectralGrid(64)
        st = FieldState(grid.constant(1.0), grid.zero_vector())
        traj = Trajectory(params=P_V2, states=[st], step_times=[0.0])
        with pytest.raises(ScalingPairInvalid):
            vacuum_endpoint_norm(traj, 2.0, 3.0)  # k = 3 < 4 in 1D

    def test_grows_toward_vacuum(self):
        from kortorus.functionals import vacuum_endpoint_norm

        grid = SpectralGrid(64)
        times = [0.0, 1.0]
        vals = []
        for squeeze in (0.3, 0.8):
            rho = grid.from_function(lambda x: 1.0 + squeeze * np.sin(x))
            states = [FieldState(rho, grid.zero_vector(), t) for t in times]
            traj = Trajectory(params=P_V2, states=states, step_times=list(times))
            vals.append(vacuum_endpoint_norm(traj, 2.0, 6.0))
        assert vals[1] > vals[0]
