"""Energy, entropy, integrability, and blow-up functionals.

Every functional is evaluated through plain rectangle-rule quadrature of
pointwise assemblies, with spectral derivatives where gradients appear.
Conventions, stated once:

* ``energy`` integrates rho |u|^2 + a rho^gamma/(gamma-1) + kappa |grad sqrt(rho)|^2
  (no 1/2 on the kinetic part); ``effective_energy`` is the decaying functional
  of the simplified system, rho |v|^2 / 2 + Pi(rho).
* the weighted-kinetic inequality is monitored with dissipation
  (nu/4) * int rho |v|^delta |grad v|^2, nu taken equal to mu, and the
  right-hand bound evaluated verbatim as
  (int (rho^{2 gamma - 1 - delta/2})^{2/(2-delta)} dx)^{2/(2-delta)}
  * (int rho |v|^2 dx)^{delta/2}.
* the quartic dissipation of the gain-of-integrability functional is
  reported in both of its algebraic forms, the literal quadruple sum
  sum_{ijk} v_j v_k d_i v_j d_i v_k (authoritative) and the
  sum_i (d_i |v|^2 / 2)^2 identity form.

Unspecified analytic constants are never asserted; inequalities are tracked
as residuals that must vanish under refinement (see the acceptance suite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dataclass_fields

import numpy as np

from .errors import (
    DeltaOutOfRange,
    EmptyTrajectory,
    PExponentOutOfRange,
    ScalingPairInvalid,
)
from .model import (
    FieldState,
    ModelParams,
    effective_velocity,
    pressure_potential,
    recover_u,
    require_positive_density,
)
from .spectral import (
    ScalarField,
    VectorField,
    gradient,
    hessian,
    integrate,
    laplacian,
    lp_norm,
    vector_gradient,
)

SCHEMA_VERSION = 1


def velocities(state: FieldState, params: ModelParams) -> tuple[VectorField, VectorField]:
    """(u, v) for the state under its variant: w is u for ``original`` and the
    effective velocity v otherwise; the counterpart is reconstructed."""
    if params.variant == "original":
        u = state.w
        return u, effective_velocity(state.rho, u, params)
    v = state.w
    return recover_u(state.rho, v, params), v


# ---------------------------------------------------------------------------
# energy


@dataclass(frozen=True)
class EnergyParts:
    total: float
    kinetic: float
    pressure: float
    capillary: float


def energy(state: FieldState, params: ModelParams) -> EnergyParts:
    """int (rho |u|^2 + a rho^gamma/(gamma-1) + kappa |grad sqrt(rho)|^2) dx,
    each addend reported separately (gamma = 1 uses the Pi convention)."""
    require_positive_density(state.rho)
    u, _ = velocities(state, params)
    rho = state.rho
    kinetic = integrate(ScalarField(rho.grid, rho.data * np.sum(u.data ** 2, axis=0)))
    if params.gamma > 1.0:
        press = integrate(ScalarField(rho.grid,
                                      params.a * rho.data ** params.gamma / (params.gamma - 1.0)))
    else:
        press = integrate(pressure_potential(rho, params))
    grad_sqrt = gradient(ScalarField(rho.grid, np.sqrt(rho.data)))
    capillary = params.kappa * integrate(
        ScalarField(rho.grid, np.sum(grad_sqrt.data ** 2, axis=0)))
    return EnergyParts(kinetic + press + capillary, kinetic, press, capillary)


def effective_energy(state: FieldState, params: ModelParams) -> float:
    """Decaying functional of the simplified system, int (rho |v|^2 / 2 + Pi(rho)) dx."""
    require_positive_density(state.rho)
    _, v = velocities(state, params)
    rho = state.rho
    kinetic = 0.5 * integrate(ScalarField(rho.grid, rho.data * np.sum(v.data ** 2, axis=0)))
    return kinetic + integrate(pressure_potential(rho, params))


def effective_energy_dissipation(state: FieldState, params: ModelParams) -> tuple[float, float]:
    """Instantaneous decay rates of the effective energy: the viscous part
    mu int rho |grad v|^2 and the density-gradient part
    (kappa/mu) int P''(rho) |grad rho|^2 (both nonnegative)."""
    require_positive_density(state.rho)
    rho = state.rho
    grid = rho.grid
    _, v = velocities(state, params)
    grad_v = vector_gradient(v)
    viscous = params.mu * integrate(
        ScalarField(grid, rho.data * np.sum(grad_v.data ** 2, axis=(0, 1))))
    grad_rho = gradient(rho)
    p_second = params.a * params.gamma * (params.gamma - 1.0) * rho.data ** (params.gamma - 2.0)
    pressure_part = params.eps * integrate(
        ScalarField(grid, p_second * np.sum(grad_rho.data ** 2, axis=0)))
    return viscous, pressure_part


# ---------------------------------------------------------------------------
# two-velocity entropy with dissipation decomposition


@dataclass(frozen=True)
class BDEntropy:
    value: float
    viscous_rate: float
    cross_rate: float
    capillary_rate: float


def bd_entropy(state: FieldState, params: ModelParams) -> BDEntropy:
    """int (rho |u|^2 + kappa |grad sqrt(rho)|^2 + Pi(rho)) dx plus the three
    instantaneous dissipation rates controlled by the two-velocity entropy:

    * viscous: (mu - alpha) int rho |grad u|^2 + alpha int rho |Du|^2,
      Du = grad u + (grad u)^T,
    * pressure cross term: int grad(ln rho) . grad(a rho^gamma)
      = a gamma int rho^{gamma-2} |grad rho|^2 >= 0,
    * capillary: kappa int rho sum_ij (d_i d_j ln rho)^2.
    """
    require_positive_density(state.rho)
    rho = state.rho
    grid = rho.grid
    u, _ = velocities(state, params)

    grad_sqrt = gradient(ScalarField(grid, np.sqrt(rho.data)))
    value = (integrate(ScalarField(grid, rho.data * np.sum(u.data ** 2, axis=0)))
             + params.kappa * integrate(ScalarField(grid, np.sum(grad_sqrt.data ** 2, axis=0)))
             + integrate(pressure_potential(rho, params)))

    grad_u = vector_gradient(u)
    grad_sq = np.sum(grad_u.data ** 2, axis=(0, 1))
    sym = grad_u.data + np.swapaxes(grad_u.data, 0, 1)
    sym_sq = np.sum(sym ** 2, axis=(0, 1))
    viscous = ((params.mu - params.alpha) * integrate(ScalarField(grid, rho.data * grad_sq))
               + params.alpha * integrate(ScalarField(grid, rho.data * sym_sq)))

    grad_rho = gradient(rho)
    cross = params.a * params.gamma * integrate(
        ScalarField(grid, rho.data ** (params.gamma - 2.0)
                    * np.sum(grad_rho.data ** 2, axis=0)))

    hess_ln = hessian(ScalarField(grid, np.log(rho.data)))
    capillary = params.kappa * integrate(
        ScalarField(grid, rho.data * np.sum(hess_ln.data ** 2, axis=(0, 1))))
    return BDEntropy(value, viscous, cross, capillary)


# ---------------------------------------------------------------------------
# weighted-kinetic (extra integrability) entropy


@dataclass(frozen=True)
class MVEntropy:
    value: float
    dissipation_rate: float
    rhs_bound: float


def mv_entropy(state: FieldState, params: ModelParams, delta: float) -> MVEntropy:
    """Weighted kinetic functional int rho |v|^{2+delta}/(2+delta) dx with its
    dissipation (mu/4) int rho |v|^delta |grad v|^2 dx and the verbatim
    right-hand bound of the corresponding differential inequality."""
    if not (0.0 < delta < 2.0):
        raise DeltaOutOfRange(f"delta must lie in (0, 2), got {delta}")
    require_positive_density(state.rho)
    rho = state.rho
    grid = rho.grid
    _, v = velocities(state, params)
    speed_sq = np.sum(v.data ** 2, axis=0)
    speed = np.sqrt(speed_sq)

    value = integrate(ScalarField(grid, rho.data * speed ** (2.0 + delta))) / (2.0 + delta)

    grad_v = vector_gradient(v)
    grad_sq = np.sum(grad_v.data ** 2, axis=(0, 1))
    dissipation = 0.25 * params.mu * integrate(
        ScalarField(grid, rho.data * speed ** delta * grad_sq))

    inner_exp = 2.0 / (2.0 - delta)
    rho_pow = rho.data ** ((2.0 * params.gamma - 1.0 - delta / 2.0) * inner_exp)
    rhs = (integrate(ScalarField(grid, rho_pow)) ** inner_exp
           * integrate(ScalarField(grid, rho.data * speed_sq)) ** (delta / 2.0))
    return MVEntropy(value, dissipation, rhs)


# ---------------------------------------------------------------------------
# gain-of-integrability functional


@dataclass(frozen=True)
class Integrability:
    value: float
    grad_rate: float
    quartic_rate: float
    quartic_rate_identity: float


def quartic_forms(v: VectorField) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise quadruple sum sum_{ijk} v_j v_k d_i v_j d_i v_k and the
    identity form sum_i (d_i |v|^2 / 2)^2 (spectral derivative of |v|^2)."""
    grad_v = vector_gradient(v)
    direct = np.einsum("j...,k...,ij...,ik...->...", v.data, v.data,
                       grad_v.data, grad_v.data)
    speed_sq = ScalarField(v.grid, np.sum(v.data ** 2, axis=0))
    grad_w = gradient(speed_sq)
    identity = np.sum((0.5 * grad_w.data) ** 2, axis=0)
    return direct, identity


def integrability_functional(state: FieldState, params: ModelParams, p: float) -> Integrability:
    """A = (1/p) int rho |v|^p dx with the two instantaneous dissipation rates
    int rho |v|^{p-2} |grad v|^2 and (p-2) int rho (quartic form) |v|^{p-4};
    the quadruple-sum assembly of the quartic form is the authoritative one,
    the identity form is reported for cross-checking."""
    if not (p > 2.0):
        raise PExponentOutOfRange(f"integrability exponent requires p > 2, got {p}")
    require_positive_density(state.rho)
    rho = state.rho
    grid = rho.grid
    _, v = velocities(state, params)
    speed_sq = np.sum(v.data ** 2, axis=0)
    speed = np.sqrt(speed_sq)

    value = integrate(ScalarField(grid, rho.data * speed ** p)) / p
    grad_v = vector_gradient(v)
    grad_sq = np.sum(grad_v.data ** 2, axis=(0, 1))
    grad_rate = integrate(ScalarField(grid, rho.data * speed ** (p - 2.0) * grad_sq))

    direct, identity = quartic_forms(v)
    # both quartic forms are O(|v|^2) near zeros of v, so the |v|^{p-4} weight
    # stays integrable for every p > 2; mask the removable 0 * inf
    safe_speed = np.where(speed_sq > 0.0, speed, 1.0)
    weight = np.where(speed_sq > 0.0, safe_speed ** (p - 4.0), 0.0)
    rate_direct = (p - 2.0) * integrate(
        ScalarField(grid, rho.data * np.where(speed_sq > 0.0, direct * weight, 0.0)))
    rate_identity = (p - 2.0) * integrate(
        ScalarField(grid, rho.data * np.where(speed_sq > 0.0, identity * weight, 0.0)))
    return Integrability(value, grad_rate, rate_direct, rate_identity)


def integrability_accumulated(trajectory, params: ModelParams, p: float) -> np.ndarray:
    """A(t) along a trajectory: instantaneous value plus time-accumulated
    dissipation integrals (trapezoidal in time).  Returns one entry per report
    time."""
    times, series = _report_times_and_states(trajectory)
    instant = [integrability_functional(s, params, p) for s in series]
    values = np.asarray([i.value for i in instant])
    rates = np.asarray([i.grad_rate + i.quartic_rate for i in instant])
    accumulated = np.concatenate([[0.0], np.cumsum(
        0.5 * (rates[1:] + rates[:-1]) * np.diff(np.asarray(times)))])
    return values + accumulated


# ---------------------------------------------------------------------------
# vacuum functional


@dataclass(frozen=True)
class VacuumFunctional:
    value: float
    rate: float
    identity_residual: float


def vacuum_functional(state: FieldState, params: ModelParams, p: float) -> VacuumFunctional:
    """B = (1/(p-1)) int rho^{1-p} dx with its production rate
    (4 p kappa / (mu (p-1)^2)) int |grad(rho^{-(p-1)/2})|^2 dx, plus the
    max-norm residual of the pointwise multiplier identity

        (kappa/(mu rho^p)) Lap rho
            = -(kappa/(mu (p-1))) Lap(rho^{1-p})
              + (4 p kappa/(mu (p-1)^2)) |grad(rho^{-(p-1)/2})|^2.
    """
    if not (p >= 2.0):
        raise PExponentOutOfRange(f"vacuum exponent requires p >= 2, got {p}")
    require_positive_density(state.rho)
    rho = state.rho
    grid = rho.grid
    coeff = params.kappa / params.mu

    value = integrate(ScalarField(grid, rho.data ** (1.0 - p))) / (p - 1.0)
    grad_half = gradient(ScalarField(grid, rho.data ** (-(p - 1.0) / 2.0)))
    rate_coeff = 4.0 * p * coeff / (p - 1.0) ** 2
    rate = rate_coeff * integrate(
        ScalarField(grid, np.sum(grad_half.data ** 2, axis=0)))

    lhs = coeff * rho.data ** (-p) * laplacian(rho).data
    rhs = (-(coeff / (p - 1.0)) * laplacian(ScalarField(grid, rho.data ** (1.0 - p))).data
           + rate_coeff * np.sum(grad_half.data ** 2, axis=0))
    residual = float(np.max(np.abs(lhs - rhs)))
    return VacuumFunctional(value, rate, residual)


# ---------------------------------------------------------------------------
# continuation monitors


def check_serrin_pair(p: float, q: float, dim: int) -> None:
    if not (1.0 <= p < math.inf):
        raise ScalingPairInvalid(f"need 1 <= p < inf, got p={p}")
    if not (q > 0.0):
        raise ScalingPairInvalid(f"need q > 0, got q={q}")
    if abs(1.0 / p + dim / (2.0 * q) - 0.5) > 1e-12:
        raise ScalingPairInvalid(
            f"(p, q) = ({p}, {q}) violates the continuation scaling "
            f"1/p + N/(2q) = 1/2 in dimension {dim}")


def _report_times_and_states(trajectory) -> tuple[list[float], list[FieldState]]:
    states = list(getattr(trajectory, "states", []))
    times = [s.time for s in states]
    if not states:
        raise EmptyTrajectory("trajectory has no snapshots")
    return times, states


def serrin_accumulator(trajectory, p: float, q: float,
                       params: ModelParams | None = None) -> float:
    """Time-quadrature of ||v(t)||_{L^q}^p over the stored snapshots
    (trapezoidal), for a scaling-admissible pair 1/p + N/(2q) = 1/2."""
    times, states = _report_times_and_states(trajectory)
    params = params or trajectory.params
    check_serrin_pair(p, q, states[0].grid.dim)
    norms = []
    for state in states:
        _, v = velocities(state, params)
        norms.append(lp_norm(v, q) ** p)
    if len(times) == 1:
        return 0.0
    return float(np.trapezoid(np.asarray(norms), x=np.asarray(times)))


def vacuum_endpoint_norm(trajectory, p: float, time_exponent: float) -> float:
    """||rho^{-(p-1)/2}||_{L^k_T(L^q)} along a trajectory, with q derived from
    the parabolic interpolation family 2/k + N/q = N/2 of the space-time
    endpoints L^inf_T(L^2) and L^2_T(H^1).

    These are the monitorable inputs/outputs of the interpolation chain that
    absorbs the vacuum functional's transport term; the chain itself is proof
    scaffolding and is not re-derived numerically.
    """
    if not (p >= 2.0):
        raise PExponentOutOfRange(f"vacuum exponent requires p >= 2, got {p}")
    times, states = _report_times_and_states(trajectory)
    dim = states[0].grid.dim
    k = time_exponent
    inv_q = 0.5 - 2.0 / (dim * k)
    if not (k >= 1.0) or inv_q < 0.0:
        raise ScalingPairInvalid(
            f"time exponent k = {k} leaves no admissible q on the parabolic "
            f"family 2/k + N/q = N/2 in dimension {dim}")
    q = math.inf if inv_q == 0.0 else 1.0 / inv_q
    norms = []
    for state in states:
        require_positive_density(state.rho)
        weight = ScalarField(state.grid, state.rho.data ** (-(p - 1.0) / 2.0))
        norms.append(lp_norm(weight, q))
    if math.isinf(k):
        return float(np.max(norms))
    if len(times) == 1:
        return 0.0
    powered = np.asarray(norms) ** k
    return float(np.trapezoid(powered, x=np.asarray(times)) ** (1.0 / k))


def vacuum_indicator(state_or_rho, eps: float, delta: float) -> float:
    """Sharp low-density mass int rho^{-eps} 1_{rho <= delta} dx (no mollification)."""
    if not (eps > 0.0):
        raise ValueError(f"need eps > 0, got {eps}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"need 0 < delta < 1, got {delta}")
    rho = state_or_rho.rho if isinstance(state_or_rho, FieldState) else state_or_rho
    require_positive_density(rho)
    mask = rho.data <= delta
    integrand = np.where(mask, rho.data ** (-eps), 0.0)
    return integrate(ScalarField(rho.grid, integrand))


# ---------------------------------------------------------------------------
# per-state report


@dataclass(frozen=True)
class MonitorSpec:
    """Exponents and thresholds for the per-step functional report."""

    delta: float = 0.5
    p_integrability: float = 4.0
    p_vacuum: float = 2.0
    serrin_p: float = 4.0
    serrin_q: float | None = None  # None: scaling-admissible default for the dim
    epsilon: float = 0.01
    delta_vacuum: float = 0.1

    def serrin_pair(self, dim: int) -> tuple[float, float]:
        if self.serrin_q is not None:
            return self.serrin_p, self.serrin_q
        # solve 1/p + N/(2q) = 1/2 for q at the configured p
        q = dim / (2.0 * (0.5 - 1.0 / self.serrin_p))
        return self.serrin_p, q


@dataclass(frozen=True)
class FunctionalReport:
    """One row of the monitoring stream; flat so it maps 1:1 onto CSV."""

    time: float
    mass: float
    rho_min: float
    rho_max: float
    rho_variance: float
    max_speed: float
    energy_total: float
    energy_kinetic: float
    energy_pressure: float
    energy_capillary: float
    effective_energy: float
    eff_energy_rate_viscous: float
    eff_energy_rate_pressure: float
    bd_value: float
    bd_rate_viscous: float
    bd_rate_cross: float
    bd_rate_capillary: float
    mv_value: float
    mv_rate_dissipation: float
    mv_rhs_bound: float
    int_value: float
    int_rate_grad: float
    int_rate_quartic: float
    int_rate_quartic_identity: float
    vac_value: float
    vac_rate: float
    vac_identity_residual: float
    vacuum_indicator: float
    serrin_integrand: float
    serrin_accumulator: float
    diverged: tuple[str, ...] = field(default=())

    @classmethod
    def csv_header(cls) -> list[str]:
        return [f.name for f in dataclass_fields(cls) if f.name != "diverged"]

    def csv_row(self) -> list[str]:
        return [repr(getattr(self, name)) for name in self.csv_header()]

    def to_json_dict(self) -> dict:
        out = {name: getattr(self, name) for name in self.csv_header()}
        out["diverged"] = list(self.diverged)
        out["schema_version"] = SCHEMA_VERSION
        return out


def evaluate_report(state: FieldState, params: ModelParams,
                    spec: MonitorSpec | None = None) -> FunctionalReport:
    """Evaluate every monitored functional on one state."""
    spec = spec or MonitorSpec()
    rho = state.rho
    u, v = velocities(state, params)
    en = energy(state, params)
    eff_diss = effective_energy_dissipation(state, params)
    bd = bd_entropy(state, params)
    mv = mv_entropy(state, params, spec.delta)
    integ = integrability_functional(state, params, spec.p_integrability)
    vac = vacuum_functional(state, params, spec.p_vacuum)
    indicator = vacuum_indicator(state, spec.epsilon, spec.delta_vacuum)
    sp_, sq = spec.serrin_pair(state.grid.dim)
    serrin_integrand = lp_norm(v, sq) ** sp_
    values = dict(
        time=state.time,
        mass=integrate(rho),
        rho_min=float(np.min(rho.data)),
        rho_max=float(np.max(rho.data)),
        rho_variance=float(np.var(rho.data)),
        max_speed=float(np.max(np.sqrt(np.sum(u.data ** 2, axis=0)))),
        energy_total=en.total,
        energy_kinetic=en.kinetic,
        energy_pressure=en.pressure,
        energy_capillary=en.capillary,
        effective_energy=effective_energy(state, params),
        eff_energy_rate_viscous=eff_diss[0],
        eff_energy_rate_pressure=eff_diss[1],
        bd_value=bd.value,
        bd_rate_viscous=bd.viscous_rate,
        bd_rate_cross=bd.cross_rate,
        bd_rate_capillary=bd.capillary_rate,
        mv_value=mv.value,
        mv_rate_dissipation=mv.dissipation_rate,
        mv_rhs_bound=mv.rhs_bound,
        int_value=integ.value,
        int_rate_grad=integ.grad_rate,
        int_rate_quartic=integ.quartic_rate,
        int_rate_quartic_identity=integ.quartic_rate_identity,
        vac_value=vac.value,
        vac_rate=vac.rate,
        vac_identity_residual=vac.identity_residual,
        vacuum_indicator=indicator,
        serrin_integrand=serrin_integrand,
        serrin_accumulator=0.0,  # running value attached by the integrator
    )
    diverged = tuple(k for k, val in values.items() if not math.isfinite(val))
    return FunctionalReport(**values, diverged=diverged)


# ---------------------------------------------------------------------------
# blow-up verdict


@dataclass(frozen=True)
class VerdictThresholds:
    """Continuation criteria levels for the blow-up report."""

    serrin_p: float = 4.0
    serrin_q: float | None = None
    serrin_bound: float = math.inf
    vacuum_eps: float = 0.01
    vacuum_delta: float = 0.1
    vacuum_bound: float = math.inf
    vacuum_growth_factor: float = 10.0


@dataclass(frozen=True)
class BlowUpReport:
    insufficient_data: bool
    final_time: float | None
    serrin_value: float | None
    serrin_pass: bool | None
    vacuum_initial: float | None
    vacuum_max: float | None
    vacuum_growth: float | None
    vacuum_pass: bool | None
    vacuum_exceeded_time: float | None
    terminated_by: str | None
    terminated_time: float | None

    def to_json_dict(self) -> dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return repr(x)
            return x
        return {k: clean(getattr(self, k)) for k in (
            "insufficient_data", "final_time", "serrin_value", "serrin_pass",
            "vacuum_initial", "vacuum_max", "vacuum_growth", "vacuum_pass",
            "vacuum_exceeded_time", "terminated_by", "terminated_time")}


def blow_up_verdict(trajectory, params: ModelParams,
                    thresholds: VerdictThresholds | None = None) -> BlowUpReport:
    """Correlate the two continuation criteria with how the run ended.

    The vacuum-indicator series is read from the per-step report stream when
    present (dense), otherwise recomputed on the stored snapshots.  A report
    is produced even for degenerate trajectories, flagged insufficient_data.
    """
    thresholds = thresholds or VerdictThresholds()
    terminated = getattr(trajectory, "terminated", None)
    terminated_by = terminated.kind if terminated is not None else None
    terminated_time = terminated.time if terminated is not None else None

    states = list(getattr(trajectory, "states", []))
    reports = list(getattr(trajectory, "reports", []))
    if len(states) < 2 and len(reports) < 2:
        return BlowUpReport(True, states[-1].time if states else None,
                            None, None, None, None, None, None, None,
                            terminated_by, terminated_time)

    p, q = thresholds.serrin_p, thresholds.serrin_q
    if q is None:
        dim = states[0].grid.dim if states else 1
        q = dim / (2.0 * (0.5 - 1.0 / p))
    serrin_value = serrin_accumulator(trajectory, p, q, params)
    serrin_pass = math.isfinite(serrin_value) and serrin_value <= thresholds.serrin_bound

    if reports:
        times = [r.time for r in reports]
        series = [r.vacuum_indicator for r in reports]
    else:
        times = [s.time for s in states]
        series = [vacuum_indicator(s, thresholds.vacuum_eps, thresholds.vacuum_delta)
                  for s in states]
    initial = series[0]
    peak = max(series)
    growth = math.inf if initial == 0.0 and peak > 0.0 else (
        peak / initial if initial > 0.0 else 0.0)
    exceeded_time = None
    level = thresholds.vacuum_growth_factor * initial
    for t, val in zip(times, series):
        if val > level:
            exceeded_time = t
            break
    vacuum_pass = (math.isfinite(peak) and peak <= thresholds.vacuum_bound
                   and exceeded_time is None)
    return BlowUpReport(False, times[-1], serrin_value, serrin_pass,
                        initial, peak, growth, vacuum_pass, exceeded_time,
                        terminated_by, terminated_time)
