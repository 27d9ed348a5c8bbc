import math

import numpy as np
import pytest

from kortorus.errors import NonFinite, PositivityLoss, StepUnderflow
from kortorus.functionals import MonitorSpec
from kortorus.littlewood_paley import BesovIndex, besov_norm
from kortorus.model import FieldState, ModelParams
from kortorus.scenarios import initial_state, manufactured_solution
from kortorus.spectral import ScalarField, SpectralGrid, VectorField, forward_transform
from kortorus.timestepping import IntegratorConfig, cfl_dt, run, step
from helpers import max_abs

P_V2 = ModelParams(mu=1.0, alpha=0.0, kappa=1.0, a=1.0, gamma=2.0, variant="effective_v2")
SMALL_A = ModelParams(mu=1.0, alpha=0.0, kappa=1.0, a=1e-12, gamma=2.0,
                      variant="effective_v2")


def base_config(**kw):
    defaults = dict(dt_initial=1e-2, dt_min=1e-10, t_end=0.5)
    defaults.update(kw)
    return IntegratorConfig(**defaults)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            IntegratorConfig(dt_initial=-1.0, dt_min=1e-9, t_end=1.0)
        with pytest.raises(ValueError):
            IntegratorConfig(dt_initial=1e-3, dt_min=1e-2, t_end=1.0)
        with pytest.raises(ValueError):
            IntegratorConfig(dt_initial=1e-3, dt_min=1e-9, t_end=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(dt_initial=1e-3, dt_min=1e-9, t_end=1.0, cfl_safety=1.5)
        with pytest.raises(ValueError):
            IntegratorConfig(dt_initial=1e-3, dt_min=1e-9, t_end=1.0, scheme="rk9")


class TestStep:
    @pytest.mark.parametrize("scheme", ["imex_euler", "imex_bdf2"])
    @pytest.mark.parametrize("dt", [1e-3, 0.1, 2.0])
    def test_equilibrium_fixed_point(self, scheme, dt):
        grid = SpectralGrid(32)
        st = initial_state(grid, "equilibrium", {"mean": 1.3})
        out = step(st, P_V2, base_config(dt_initial=max(dt, 1e-3), scheme=scheme), dt)
        assert max_abs(out.rho.data - 1.3) < 1e-13
        assert max_abs(out.w.data) < 1e-13

    def test_exact_integrating_factor(self):
        # v = 0: one imex_euler step multiplies the density mode-1 amplitude
        # by exactly exp(-(kappa/mu) dt)
        grid = SpectralGrid(64)
        st = initial_state(grid, "single_mode", {"mean": 1.0, "amplitude": 0.1})
        dt = 0.07
        out = step(st, P_V2, base_config(), dt)
        coeff = forward_transform(out.rho)
        assert abs(2 * abs(coeff[1]) - 0.1 * math.exp(-P_V2.eps * dt)) < 1e-14

    def test_positivity_loss_raised(self):
        grid = SpectralGrid(64)
        st = initial_state(grid, "gaussian_bump",
                           {"mean": 1.0, "depth": 0.999, "width": 0.3,
                            "velocity_amplitude": 3.0})
        params = ModelParams(mu=0.05, alpha=0.0, kappa=0.0025, a=0.01, gamma=2.0,
                             variant="effective_v2")
        with pytest.raises(PositivityLoss) as err:
            step(st, params, base_config(), 0.5)
        assert err.value.location is not None

    def test_rejects_nonpositive_dt(self):
        grid = SpectralGrid(32)
        st = initial_state(grid, "equilibrium", {})
        with pytest.raises(ValueError):
            step(st, P_V2, base_config(), 0.0)

    def test_non_finite_update_raises(self):
        grid = SpectralGrid(32)
        st = initial_state(grid, "equilibrium", {"mean": 1.0})
        bad_forcing = lambda t: (np.full(grid.shape, np.nan),
                                 np.zeros((1,) + grid.shape))
        with pytest.raises(NonFinite):
            step(st, P_V2, base_config(), 1e-3, forcing=bad_forcing)

    def test_density_update_unconditionally_stable(self):
        # nonlinear terms absent (v = 0, negligible pressure): each mode damps
        # by the exact exponential factor no matter how large dt is
        grid = SpectralGrid(64)
        st = initial_state(grid, "single_mode", {"mean": 1.0, "amplitude": 0.1,
                                                 "wavenumber": 4})
        dt = 50.0
        out = step(st, SMALL_A, base_config(dt_initial=dt), dt)
        coeff = forward_transform(out.rho)
        assert abs(coeff[0] - 1.0) < 1e-13
        assert abs(2 * abs(coeff[4]) - 0.1 * math.exp(-SMALL_A.eps * 16.0 * dt)) < 1e-14
        assert max_abs(out.rho.data - 1.0) < 1e-10


class TestCFL:
    def test_zero_velocity_diffusion_bound(self):
        grid = SpectralGrid(64)
        x = grid.axes()[0]
        st = FieldState(ScalarField(grid, 1.0 + 0.5 * np.sin(x)), grid.zero_vector())
        cfg = base_config(cfl_safety=0.5)
        h = grid.spacing[0]
        nu_expl = P_V2.mu * float(np.max(st.rho.data)) - P_V2.mu * float(np.min(st.rho.data))
        expected = 0.5 * h * h / nu_expl
        assert cfl_dt(st, P_V2, cfg) == pytest.approx(expected, rel=1e-14)

    def test_velocity_halves_advective_bound(self):
        grid = SpectralGrid(64)
        cfg = base_config(cfl_safety=0.4, implicit_viscosity_shift=10.0)
        h = grid.spacing[0]
        dts = []
        for amp in (1.0, 2.0):
            w = VectorField(grid, np.full((1,) + grid.shape, amp))
            st = FieldState(grid.constant(1.0), w)
            dts.append(cfl_dt(st, P_V2, cfg))
        assert dts[0] == pytest.approx(0.4 * h / 1.0, rel=1e-14)
        assert dts[1] == pytest.approx(dts[0] / 2.0, rel=1e-14)

    def test_formula_on_random_state(self):
        grid = SpectralGrid(64)
        st = initial_state(grid, "random_smooth",
                           {"mean": 1.5, "amplitude": 0.3,
                            "velocity_amplitude": 0.7}, seed=2)
        cfg = base_config(cfl_safety=0.9)
        h = grid.spacing[0]
        from kortorus.model import recover_u
        u = recover_u(st.rho, st.w, P_V2)
        max_u = float(np.max(np.abs(u.data)))
        nu_expl = P_V2.mu * (float(np.max(st.rho.data)) - float(np.min(st.rho.data)))
        expected = 0.9 * min(h / max_u, h * h / nu_expl)
        assert cfl_dt(st, P_V2, cfg) == pytest.approx(expected, rel=1e-14)

    def test_underflow(self):
        grid = SpectralGrid(64)
        w = VectorField(grid, np.full((1,) + grid.shape, 1e9))
        st = FieldState(grid.constant(1.0), w)
        with pytest.raises(StepUnderflow):
            cfl_dt(st, P_V2, base_config(dt_min=1e-3))


class TestRun:
    def test_equilibrium_trajectory_constant(self):
        grid = SpectralGrid(32)
        st = initial_state(grid, "equilibrium", {"mean": 1.0})
        traj = run(st, P_V2, base_config(t_end=0.3))
        assert traj.terminated is None
        assert traj.states[0].time == 0.0
        assert traj.reports[-1].time == pytest.approx(0.3)
        energies = [r.energy_total for r in traj.reports]
        assert max(energies) - min(energies) < 1e-12

    def test_times_strictly_increasing(self):
        grid = SpectralGrid(32)
        st = initial_state(grid, "single_mode", {"mean": 1.0, "amplitude": 0.05})
        traj = run(st, P_V2, base_config(t_end=0.2))
        times = traj.times
        assert all(t1 > t0 for t0, t1 in zip(times, times[1:]))

    def test_mass_conserved(self):
        grid = SpectralGrid(64)
        st = initial_state(grid, "random_smooth",
                           {"mean": 1.2, "amplitude": 0.2,
                            "velocity_amplitude": 0.3}, seed=4)
        traj = run(st, P_V2, base_config(t_end=1.0, dt_initial=2e-3))
        masses = [r.mass for r in traj.reports]
        assert max(abs(m - masses[0]) for m in masses) / abs(masses[0]) < 1e-12

    def test_determinism_bit_identical(self):
        grid = SpectralGrid(64)
        st = initial_state(grid, "random_smooth",
                           {"mean": 1.2, "amplitude": 0.2,
                            "velocity_amplitude": 0.3}, seed=5)
        cfg = base_config(t_end=0.2, dt_initial=2e-3)
        t1 = run(st, P_V2, cfg)
        t2 = run(st, P_V2, cfg)
        assert t1.final_state.rho.data.tobytes() == t2.final_state.rho.data.tobytes()
        assert t1.final_state.w.data.tobytes() == t2.final_state.w.data.tobytes()

    def test_heat_kernel_oracle(self):
        # with negligible pressure the density follows per-mode exponential
        # decay; the velocity stays at roundoff scale
        grid = SpectralGrid(64)
        st = initial_state(grid, "single_mode",
                           {"mean": 1.0, "amplitude": 0.01, "wavenumber": 2})
        T = 0.25
        cfg = base_config(t_end=T, dt_initial=1e-3, dt_min=1e-12)
        traj = run(st, SMALL_A, cfg)
        coeff = forward_transform(traj.final_state.rho)
        decay = math.exp(-SMALL_A.eps * 4.0 * T)
        assert abs(2 * abs(coeff[2]) - 0.01 * decay) < 1e-8
        # density contracts toward its mean
        spreads = [r.rho_max - r.rho_min for r in traj.reports]
        assert spreads[-1] < spreads[0]

    def test_heat_run_besov_norm_decreases(self):
        grid = SpectralGrid(64)
        st = initial_state(grid, "single_mode",
                           {"mean": 1.0, "amplitude": 0.01, "wavenumber": 3})
        cfg = base_config(t_end=0.2, dt_initial=2e-3)
        traj = run(st, SMALL_A, cfg, monitors=MonitorSpec())
        idx = BesovIndex(1.0, 2.0, math.inf)
        norms = [besov_norm(ScalarField(s.grid, s.rho.data - np.mean(s.rho.data)), idx)
                 for s in traj.states]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(norms[1:], norms[2:]))

    def test_snapshot_cadence(self):
        grid = SpectralGrid(32)
        st = initial_state(grid, "single_mode", {"mean": 1.0, "amplitude": 0.02})
        cfg = base_config(t_end=0.5, dt_initial=1e-2, snapshot_interval=0.1)
        traj = run(st, P_V2, cfg)
        assert len(traj.states) == 6  # t = 0 plus five cadence targets
        for want, got in zip([0.0, 0.1, 0.2, 0.3, 0.4, 0.5], traj.times):
            assert abs(want - got) <= 5e-3 + 1e-12  # nearest accepted step

    def test_positivity_reject_and_halve_then_fail(self):
        grid = SpectralGrid(64)
        st = initial_state(grid, "gaussian_bump",
                           {"mean": 1.0, "depth": 0.95, "width": 0.4,
                            "velocity_amplitude": 2.8})
        params = ModelParams(mu=0.05, alpha=0.0, kappa=0.0025, a=0.01, gamma=2.0,
                             variant="effective_v2")
        cfg = base_config(t_end=3.0, dt_initial=2e-3, dt_min=1e-10, cfl_safety=0.5)
        with pytest.raises(PositivityLoss) as err:
            run(st, params, cfg)
        traj = err.value.trajectory
        assert traj is not None
        assert traj.terminated is not None
        assert traj.terminated.kind == "PositivityLoss"
        assert len(traj.reports) > 10
        # the final recorded state is still strictly positive
        assert traj.reports[-1].rho_min > 0.0

    def test_forcing_manufactured_exactness(self):
        # forcing derived for the manufactured solution keeps the discrete
        # trajectory within the scheme's truncation error of the exact fields
        grid = SpectralGrid(64)
        ms = manufactured_solution("ms1d")
        forcing = ms.forcing(grid, P_V2)
        cfg = base_config(t_end=0.2, dt_initial=1e-3, adaptive=False)
        traj = run(ms.state(grid, 0.0), P_V2, cfg, forcing=forcing)
        exact = ms.state(grid, 0.2)
        assert max_abs(traj.final_state.rho.data - exact.rho.data) < 5e-4
        assert max_abs(traj.final_state.w.data - exact.w.data) < 5e-4


class TestTemporalOrder:
    @pytest.mark.parametrize("scheme,min_order", [("imex_euler", 0.9),
                                                  ("imex_bdf2", 1.8)])
    def test_manufactured_convergence(self, scheme, min_order):
        grid = SpectralGrid(64)
        ms = manufactured_solution("ms1d")
        forcing = ms.forcing(grid, P_V2)
        T = 0.4
        errors = []
        for nsteps in (40, 80):
            cfg = IntegratorConfig(dt_initial=T / nsteps, dt_min=1e-12, t_end=T,
                                   scheme=scheme, adaptive=False)
            traj = run(ms.state(grid, 0.0), P_V2, cfg, forcing=forcing)
            exact = ms.state(grid, T)
            errors.append(max(max_abs(traj.final_state.rho.data - exact.rho.data),
                              max_abs(traj.final_state.w.data - exact.w.data)))
        order = math.log2(errors[0] / errors[1])
        assert order >= min_order


class TestCrossVariant:
    def test_original_and_effective_trajectories_converge(self):
        # the same physical initial state integrated as (rho, u) under the
        # original variant and as (rho, v) under effective_v1 must agree up
        # to the schemes' first-order error, so the gap halves with dt
        from kortorus.model import effective_velocity, recover_u
        from kortorus.scenarios import random_trig_field

        grid = SpectralGrid(64)
        params = ModelParams(mu=1.0, alpha=0.5, kappa=0.5, a=1.0, gamma=2.0,
                             variant="effective_v1")
        rho0 = grid.scalar(1.3 + 0.2 * random_trig_field(
            grid, np.random.default_rng(8), kmax=3))
        u0 = VectorField(grid, 0.3 * random_trig_field(
            grid, np.random.default_rng(9), kmax=3)[None])
        v0 = effective_velocity(rho0, u0, params)
        gaps = []
        for dt in (2e-3, 1e-3):
            cfg = IntegratorConfig(dt_initial=dt, dt_min=1e-12, t_end=0.2,
                                   adaptive=False)
            t_orig = run(FieldState(rho0, u0), params.with_variant("original"), cfg)
            t_eff = run(FieldState(rho0, v0), params, cfg)
            u_eff = recover_u(t_eff.final_state.rho, t_eff.final_state.w, params)
            gaps.append(max(
                max_abs(t_orig.final_state.rho.data - t_eff.final_state.rho.data),
                max_abs(t_orig.final_state.w.data - u_eff.data)))
        assert gaps[0] < 1e-3
        assert gaps[1] < 0.65 * gaps[0]
