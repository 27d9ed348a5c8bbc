"""Isothermal capillary-fluid model on the torus.

Three right-hand sides share one assembly:

* ``original``      d_t rho + div(rho u) = 0,
                    d_t(rho u) + div(rho u x u) - div(mu rho grad u)
                    - div(alpha rho grad u^T) + grad(a rho^gamma) = div K,
* ``effective_v1``  (alpha = kappa/mu) and
* ``effective_v2``  (alpha = 0, kappa = mu^2), both advancing the effective
  velocity v = u + (kappa/mu) grad ln(rho):
                    d_t rho + div(rho v) - (kappa/mu) Lap rho = 0,
                    rho d_t v + rho u . grad v - div(mu rho grad v)
                    + grad P(rho) = 0.

The two effective variants are the same evolution operator; only the
admissible coefficient sets differ (see README).  The capillary stress
divergence is available in two independently assembled forms:
``korteweg_div_general`` for an arbitrary coefficient law kappa(rho) and
``korteweg_div_special`` for the kappa(rho) = kappa/rho closed form
kappa * div(rho grad grad ln rho); their agreement is a core verification
target.

Momentum tendencies are returned per unit mass (divided pointwise by rho);
every nonlinear product is dealiased with the 2/3 rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import CoefficientDomainError, InvalidField, NonpositiveDensity, VariantMismatch
from .spectral import (
    ScalarField,
    SpectralGrid,
    TensorField,
    VectorField,
    dealias,
    divergence,
    gradient,
    hessian,
    laplacian,
    tensor_divergence,
    vector_gradient,
)

#: Density positivity floor.  Samples at or below it raise NonpositiveDensity
#: instead of being clipped: the vacuum monitors must never see doctored data.
RHO_FLOOR = 1e-8

VARIANTS = ("original", "effective_v1", "effective_v2")

_REL_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Physical coefficients and system variant.

    Constraints: mu > 0, mu > alpha >= 0, kappa > 0, a > 0, gamma >= 1.
    ``effective_v1`` additionally requires alpha = kappa/mu and
    ``effective_v2`` requires alpha = 0 with kappa = mu^2.
    """

    mu: float
    alpha: float
    kappa: float
    a: float
    gamma: float
    variant: str = "original"

    def __post_init__(self):
        if not (self.mu > 0.0):
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not (self.mu > self.alpha >= 0.0):
            raise ValueError(
                f"viscosities must satisfy mu > alpha >= 0, got mu={self.mu}, alpha={self.alpha}")
        if not (self.kappa > 0.0):
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not (self.a > 0.0):
            raise ValueError(f"pressure constant a must be positive, got {self.a}")
        if not (self.gamma >= 1.0):
            raise ValueError(f"adiabatic exponent gamma must be >= 1, got {self.gamma}")
        if self.variant not in VARIANTS:
            raise VariantMismatch(
                f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.variant == "effective_v1":
            if not math.isclose(self.alpha, self.kappa / self.mu, rel_tol=_REL_TOL, abs_tol=0.0):
                raise VariantMismatch(
                    f"effective_v1 requires alpha = kappa/mu, got alpha={self.alpha}, "
                    f"kappa/mu={self.kappa / self.mu}")
        if self.variant == "effective_v2":
            if self.alpha != 0.0:
                raise VariantMismatch(
                    f"effective_v2 requires alpha = 0, got alpha={self.alpha}")
            if not math.isclose(self.kappa, self.mu ** 2, rel_tol=_REL_TOL, abs_tol=0.0):
                raise VariantMismatch(
                    f"effective_v2 requires kappa = mu^2, got kappa={self.kappa}, "
                    f"mu^2={self.mu ** 2}")

    @property
    def eps(self) -> float:
        """Change-of-variables coefficient kappa/mu."""
        return self.kappa / self.mu

    def with_variant(self, variant: str) -> "ModelParams":
        return replace(self, variant=variant)


@dataclass(frozen=True, eq=False)
class FieldState:
    """Density plus velocity sample; ``w`` is u for the original variant and
    the effective velocity v for the effective variants."""

    rho: ScalarField
    w: VectorField
    time: float = 0.0

    def __post_init__(self):
        if self.rho.grid is not self.w.grid and self.rho.grid != self.w.grid:
            raise InvalidField("density and velocity live on different grids")
        if not (self.time >= 0.0):
            raise ValueError(f"time must be nonnegative, got {self.time}")

    @property
    def grid(self) -> SpectralGrid:
        return self.rho.grid

    def validate(self) -> "FieldState":
        require_positive_density(self.rho)
        if not np.all(np.isfinite(self.w.data)):
            raise InvalidField("velocity contains non-finite samples")
        return self


def require_positive_density(rho: ScalarField, floor: float = RHO_FLOOR) -> None:
    data = rho.data
    if not np.all(np.isfinite(data)):
        raise InvalidField("density contains non-finite samples")
    idx = np.unravel_index(np.argmin(data), data.shape)
    low = float(data[idx])
    if low <= floor:
        raise NonpositiveDensity(
            f"density sample {low} at index {tuple(int(i) for i in idx)} is at or below "
            f"the positivity floor {floor}", location=tuple(int(i) for i in idx), value=low)


# ---------------------------------------------------------------------------
# pressure


def pressure(rho: ScalarField, params: ModelParams) -> ScalarField:
    """Barotropic pressure P(rho) = a rho^gamma (pointwise)."""
    require_positive_density(rho)
    return rho.with_data(params.a * rho.data ** params.gamma)


def pressure_potential(rho: ScalarField, params: ModelParams) -> ScalarField:
    """Pressure potential Pi with rho * Pi''(rho) = P'(rho).

    Pi(rho) = a rho^gamma / (gamma - 1) for gamma > 1 and
    Pi(rho) = a (rho ln rho - rho + 1) for gamma = 1 (normalized so Pi(1) = 0);
    the additive normalization cancels in every monitored difference.
    """
    require_positive_density(rho)
    if params.gamma > 1.0:
        data = params.a * rho.data ** params.gamma / (params.gamma - 1.0)
    else:
        data = params.a * (rho.data * np.log(rho.data) - rho.data + 1.0)
    return rho.with_data(data)


# ---------------------------------------------------------------------------
# capillarity coefficient laws


@dataclass(frozen=True)
class CoefficientLaw:
    """Twice-differentiable capillarity coefficient kappa(rho).

    ``value`` and ``derivative`` are vectorized callables of the density
    samples.  Both must stay finite on the density range in use.
    """

    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"


def constant_capillarity(kappa: float) -> CoefficientLaw:
    return CoefficientLaw(lambda r: np.full_like(r, kappa),
                          lambda r: np.zeros_like(r),
                          label=f"{kappa}")


def inverse_density_capillarity(kappa: float) -> CoefficientLaw:
    """kappa(rho) = kappa / rho, the law that closes into div(rho grad grad ln rho)."""
    return CoefficientLaw(lambda r: kappa / r,
                          lambda r: -kappa / r ** 2,
                          label=f"{kappa}/rho")


def power_law_capillarity(kappa: float, exponent: float) -> CoefficientLaw:
    return CoefficientLaw(lambda r: kappa * r ** exponent,
                          lambda r: kappa * exponent * r ** (exponent - 1.0),
                          label=f"{kappa} rho^{exponent}")


def _evaluate_law(law: CoefficientLaw, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        with np.errstate(all="ignore"):
            value = np.asarray(law.value(rho), dtype=float)
            deriv = np.asarray(law.derivative(rho), dtype=float)
    except (FloatingPointError, ValueError, ZeroDivisionError) as exc:
        raise CoefficientDomainError(
            f"coefficient law {law.label} failed on the density range: {exc}") from exc
    if not (np.all(np.isfinite(value)) and np.all(np.isfinite(deriv))):
        raise CoefficientDomainError(
            f"coefficient law {law.label} is non-finite on the density range "
            f"[{rho.min()}, {rho.max()}]")
    return value, deriv


# ---------------------------------------------------------------------------
# capillary stress divergence


def korteweg_div_general(rho: ScalarField, law: CoefficientLaw) -> VectorField:
    """div K = grad(rho k(rho) Lap rho + (k(rho) + rho k'(rho)) |grad rho|^2 / 2)
               - div(k(rho) grad rho x grad rho),

    assembled with spectral derivatives and dealiased products.
    """
    require_positive_density(rho)
    grid = rho.grid
    kval, kprime = _evaluate_law(law, rho.data)
    grad_rho = gradient(rho)
    lap_rho = laplacian(rho)
    grad_sq = np.sum(grad_rho.data ** 2, axis=0)

    scalar_part = rho.data * kval * lap_rho.data + 0.5 * (kval + rho.data * kprime) * grad_sq
    term1 = gradient(dealias(ScalarField(grid, scalar_part)))

    d = grid.dim
    tensor = np.empty((d, d) + grid.shape)
    for i in range(d):
        for j in range(d):
            tensor[i, j] = kval * grad_rho.data[i] * grad_rho.data[j]
    term2 = tensor_divergence(dealias(TensorField(grid, tensor)))
    return VectorField(grid, term1.data - term2.data)


def korteweg_div_special(rho: ScalarField, kappa: float) -> VectorField:
    """Closed form for kappa(rho) = kappa/rho:

        (div K)_j = kappa * sum_i d_i(rho d_i d_j ln rho).
    """
    require_positive_density(rho)
    grid = rho.grid
    ln_rho = ScalarField(grid, np.log(rho.data))
    hess = hessian(ln_rho)
    d = grid.dim
    weighted = np.empty((d, d) + grid.shape)
    for i in range(d):
        for j in range(d):
            weighted[i, j] = rho.data * hess.data[i, j]
    div = tensor_divergence(dealias(TensorField(grid, weighted)))
    return VectorField(grid, kappa * div.data)


# ---------------------------------------------------------------------------
# velocity change of variables


def effective_velocity(rho: ScalarField, u: VectorField, params: ModelParams) -> VectorField:
    """v = u + (kappa/mu) grad ln rho."""
    require_positive_density(rho)
    grad_ln = gradient(ScalarField(rho.grid, np.log(rho.data)))
    return VectorField(rho.grid, u.data + params.eps * grad_ln.data)


def recover_u(rho: ScalarField, v: VectorField, params: ModelParams) -> VectorField:
    """Inverse change of variables, u = v - (kappa/mu) grad ln rho."""
    require_positive_density(rho)
    grad_ln = gradient(ScalarField(rho.grid, np.log(rho.data)))
    return VectorField(rho.grid, v.data - params.eps * grad_ln.data)


# ---------------------------------------------------------------------------
# right-hand sides


def _advective_term(u: VectorField, w: VectorField) -> np.ndarray:
    """(u . grad) w, dealiased per component."""
    grad_w = vector_gradient(w)
    grid = u.grid
    d = grid.dim
    out = np.empty((d,) + grid.shape)
    for j in range(d):
        acc = np.zeros(grid.shape)
        for i in range(d):
            acc = acc + u.data[i] * grad_w.data[i, j]
        out[j] = acc
    return dealias(VectorField(grid, out)).data


def _weighted_tensor_divergence(weight: np.ndarray, tensor_data: np.ndarray,
                                grid: SpectralGrid) -> np.ndarray:
    """div(weight * T) with the product dealiased, component j = sum_i d_i(w T_ij)."""
    prod = dealias(TensorField(grid, weight * tensor_data))
    return tensor_divergence(prod).data


def rhs(state: FieldState, params: ModelParams) -> tuple[ScalarField, VectorField]:
    """Time derivative (d rho/dt, d w/dt) for the configured variant.

    For the effective variants the advecting field is the reconstructed
    u = v - (kappa/mu) grad ln rho, and the momentum tendency is stored per
    unit mass (after pointwise division by rho).
    """
    if params.variant not in VARIANTS:
        raise VariantMismatch(f"unknown variant {params.variant!r}")
    state.validate()
    grid = state.grid
    rho, w = state.rho, state.w

    if params.variant == "original":
        u = w
        mass_flux = dealias(VectorField(grid, rho.data * u.data))
        drho = ScalarField(grid, -divergence(mass_flux).data)

        grad_u = vector_gradient(u)
        diffusion = params.mu * _weighted_tensor_divergence(rho.data, grad_u.data, grid)
        if params.alpha != 0.0:
            grad_u_t = np.swapaxes(grad_u.data, 0, 1)
            diffusion = diffusion + params.alpha * _weighted_tensor_divergence(
                rho.data, grad_u_t, grid)
        cap = korteweg_div_special(rho, params.kappa)
        grad_p = gradient(pressure(rho, params))
        advect = _advective_term(u, u)
        momentum = (-advect
                    + dealias(VectorField(grid, (diffusion + cap.data - grad_p.data)
                                          / rho.data)).data)
        return drho, VectorField(grid, momentum)

    # effective variants share one evolution operator
    v = w
    u = recover_u(rho, v, params)
    mass_flux = dealias(VectorField(grid, rho.data * v.data))
    drho = ScalarField(grid,
                       -divergence(mass_flux).data + params.eps * laplacian(rho).data)

    grad_v = vector_gradient(v)
    diffusion = params.mu * _weighted_tensor_divergence(rho.data, grad_v.data, grid)
    grad_p = gradient(pressure(rho, params))
    advect = _advective_term(u, v)
    momentum = (-advect
                + dealias(VectorField(grid, (diffusion - grad_p.data) / rho.data)).data)
    return drho, VectorField(grid, momentum)
