"""Initial-condition families, seeded field corpora, and manufactured solutions.

Families (all analytic, so spectral residuals decay exponentially):

* ``equilibrium``     constant density, zero velocity.
* ``single_mode``     mean + amplitude * prod_i cos(k x_i); optional velocity
                      mode of the same wavenumber.
* ``gaussian_bump``   periodic bump exp(sum_i (cos th_i - 1)/width^2) carved
                      out of (or added to) the mean; ``velocity_amplitude``
                      adds the outflow field w_j = A sin(th_j), which deepens
                      the dip and drives vacuum-squeeze scenarios.
* ``random_smooth``   seeded trigonometric polynomial with exponentially
                      decaying coefficients.
* ``manufactured``    registry entry evaluated at t = 0.

Manufactured solutions carry symbolic density/velocity profiles; the forcing
that makes them exact solutions of the effective-velocity system is derived
with sympy once per (solution, parameter set) and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from .model import FieldState, ModelParams
from .spectral import ScalarField, SpectralGrid, VectorField

TAU = 2.0 * math.pi


# ---------------------------------------------------------------------------
# random trigonometric fields


def random_trig_field(grid: SpectralGrid, rng: np.random.Generator,
                      kmax: int = 3, decay: float = 0.7,
                      normalize: str = "max") -> np.ndarray:
    """Zero-mean random trigonometric polynomial with sup norm <= 1.

    Coefficients of integer mode k carry weight exp(-decay |k|); downstream
    compositions (log, powers) then have spectra decaying fast enough for the
    identity suites' resolution-doubling checks.  ``normalize="max"`` scales
    by the grid maximum; ``"coeff"`` scales by the coefficient-sum bound,
    which is grid-independent, so the same seed yields samples of the *same*
    function on grids of different resolution.
    """
    mesh = grid.meshgrid()
    theta = [TAU * m / L for m, L in zip(mesh, grid.length)]
    out = np.zeros(grid.shape)
    bound = 0.0
    if grid.dim == 1:
        for k in range(1, kmax + 1):
            amp = math.exp(-decay * k)
            c1, c2 = rng.normal(), rng.normal()
            out = out + amp * (c1 * np.cos(k * theta[0]) + c2 * np.sin(k * theta[0]))
            bound += amp * math.hypot(c1, c2)
    else:
        for kx in range(0, kmax + 1):
            for ky in range(-kmax, kmax + 1):
                if kx == 0 and ky <= 0:
                    continue  # one representative per conjugate pair
                amp = math.exp(-decay * math.hypot(kx, ky))
                phase = kx * theta[0] + ky * theta[1]
                c1, c2 = rng.normal(), rng.normal()
                out = out + amp * (c1 * np.cos(phase) + c2 * np.sin(phase))
                bound += amp * math.hypot(c1, c2)
    out -= out.mean()
    if normalize == "coeff":
        return out / bound if bound > 0 else out
    peak = np.max(np.abs(out))
    return out / peak if peak > 0 else out


def random_spectrum_field(grid: SpectralGrid, rng: np.random.Generator,
                          kmax: int | None = None, slope: float = 2.0) -> np.ndarray:
    """Mean-free random field with power-law modulus spectrum |k|^{-slope},
    band-limited to |k|_inf <= kmax (default: the 2/3 cutoff).  Used by the
    Besov-norm corpus sweeps, which want content in every shell."""
    if kmax is None:
        kmax = min(grid.resolution) // 3
    coeffs = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    keep = np.ones(grid.shape, dtype=bool)
    for axis, n in enumerate(grid.resolution):
        k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        shape = [1] * grid.dim
        shape[axis] = n
        keep &= (k <= kmax).reshape(shape)
    mag = grid.beta_magnitude.copy()
    mag[mag == 0.0] = 1.0
    coeffs *= keep * mag ** (-slope)
    data = np.fft.ifftn(coeffs).real
    data -= data.mean()
    peak = np.max(np.abs(data))
    return data / peak if peak > 0 else data


def density_corpus(grid: SpectralGrid, count: int, seed: int,
                   lo: float = 1.0, hi: float = 3.0,
                   kmax: int = 3, decay: float = 0.7) -> list[ScalarField]:
    """Seeded smooth densities with range inside [lo, hi]."""
    rng = np.random.default_rng(seed)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    out = []
    for _ in range(count):
        pert = random_trig_field(grid, rng, kmax=kmax, decay=decay, normalize="coeff")
        out.append(ScalarField(grid, mid + 0.98 * half * pert))
    return out


def velocity_corpus(grid: SpectralGrid, count: int, seed: int,
                    amplitude: float = 0.5, kmax: int = 3,
                    decay: float = 0.7) -> list[VectorField]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        comps = [amplitude * random_trig_field(grid, rng, kmax=kmax, decay=decay)
                 for _ in range(grid.dim)]
        out.append(VectorField(grid, np.stack(comps)))
    return out


def besov_corpus(grid: SpectralGrid, count: int, seed: int,
                 slope: float = 1.5, kmax: int | None = None) -> list[ScalarField]:
    """Mean-free fields with full-shell spectral content for the norm sweeps."""
    rng = np.random.default_rng(seed)
    return [ScalarField(grid, random_spectrum_field(grid, rng, kmax=kmax, slope=slope))
            for _ in range(count)]


# ---------------------------------------------------------------------------
# initial-condition families


FAMILIES = ("equilibrium", "single_mode", "gaussian_bump", "random_smooth",
            "manufactured")


def _angles(grid: SpectralGrid, center=None) -> list[np.ndarray]:
    mesh = grid.meshgrid()
    cs = center or [0.5] * grid.dim
    return [TAU * (m / L - c) for m, L, c in zip(mesh, grid.length, cs)]


def initial_state(grid: SpectralGrid, family: str, fam_params: dict | None = None,
                  seed: int | None = None) -> FieldState:
    """Build the t = 0 state of a named family."""
    p = dict(fam_params or {})
    if family == "equilibrium":
        mean = float(p.pop("mean", 1.0))
        _reject_unknown(family, p)
        return FieldState(grid.constant(mean), grid.zero_vector())

    if family == "single_mode":
        mean = float(p.pop("mean", 1.0))
        amplitude = float(p.pop("amplitude", 0.1))
        k = int(p.pop("wavenumber", 1))
        vel = float(p.pop("velocity_amplitude", 0.0))
        _reject_unknown(family, p)
        theta = _angles(grid, center=[0.0] * grid.dim)
        rho = mean + amplitude * np.prod([np.cos(k * th) for th in theta], axis=0)
        w = np.zeros((grid.dim,) + grid.shape)
        for j in range(grid.dim):
            comp = vel * np.sin(k * theta[j])
            for i in range(grid.dim):
                if i != j:
                    comp = comp * np.cos(k * theta[i])
            w[j] = comp
        return FieldState(ScalarField(grid, rho), VectorField(grid, w))

    if family == "gaussian_bump":
        mean = float(p.pop("mean", 1.0))
        depth = float(p.pop("depth", 0.5))
        width = float(p.pop("width", 0.5))
        center = p.pop("center", None)
        vel = float(p.pop("velocity_amplitude", 0.0))
        _reject_unknown(family, p)
        theta = _angles(grid, center)
        bump = np.exp(sum((np.cos(th) - 1.0) for th in theta) / width ** 2)
        rho = mean - depth * bump
        w = np.stack([vel * np.sin(th) for th in theta])
        return FieldState(ScalarField(grid, rho), VectorField(grid, w))

    if family == "random_smooth":
        mean = float(p.pop("mean", 1.0))
        amplitude = float(p.pop("amplitude", 0.2))
        kmax = int(p.pop("modes", 3))
        decay = float(p.pop("decay", 0.7))
        vel = float(p.pop("velocity_amplitude", 0.0))
        vel_kmax = int(p.pop("velocity_modes", kmax))
        _reject_unknown(family, p)
        rng = np.random.default_rng(0 if seed is None else seed)
        rho = mean + amplitude * random_trig_field(grid, rng, kmax=kmax, decay=decay)
        comps = [vel * random_trig_field(grid, rng, kmax=vel_kmax, decay=decay)
                 for _ in range(grid.dim)]
        return FieldState(ScalarField(grid, rho), VectorField(grid, np.stack(comps)))

    if family == "manufactured":
        sid = p.pop("id", "ms1d")
        _reject_unknown(family, p)
        return manufactured_solution(sid).state(grid, 0.0)

    raise ValueError(f"unknown initial-condition family {family!r}, "
                     f"expected one of {FAMILIES}")


def _reject_unknown(family: str, leftover: dict):
    if leftover:
        raise ValueError(f"unknown parameters for family {family!r}: "
                         f"{sorted(leftover)}")


# ---------------------------------------------------------------------------
# manufactured solutions


@dataclass(frozen=True)
class ManufacturedSolution:
    """Symbolic exact solution of the effective-velocity system with forcing."""

    sid: str
    dim: int
    rho_expr: sp.Expr
    v_exprs: tuple[sp.Expr, ...]

    @property
    def _coords(self) -> tuple[sp.Symbol, ...]:
        return sp.symbols("x y")[: self.dim]

    def _lambdify(self, expr: sp.Expr):
        t = sp.Symbol("t")
        return sp.lambdify((t, *self._coords), expr, modules="numpy")

    def state(self, grid: SpectralGrid, time: float) -> FieldState:
        if grid.dim != self.dim:
            raise ValueError(f"solution {self.sid!r} is {self.dim}-dimensional")
        mesh = grid.meshgrid()
        rho_fn = self._lambdify(self.rho_expr)
        rho = np.broadcast_to(np.asarray(rho_fn(time, *mesh), dtype=float),
                              grid.shape).copy()
        comps = []
        for expr in self.v_exprs:
            fn = self._lambdify(expr)
            comps.append(np.broadcast_to(np.asarray(fn(time, *mesh), dtype=float),
                                         grid.shape).copy())
        return FieldState(ScalarField(grid, rho), VectorField(grid, np.stack(comps)),
                          time=max(time, 0.0))

    def forcing_exprs(self, mu: float, kappa: float, a: float,
                      gamma: float) -> tuple[sp.Expr, tuple[sp.Expr, ...]]:
        """Symbolic (f_rho, f_v) making (rho, v) an exact solution of

            d_t rho + div(rho v) - (kappa/mu) Lap rho = f_rho,
            d_t v + (u . grad) v - (div(mu rho grad v) - grad(a rho^gamma))/rho = f_v,

        with u = v - (kappa/mu) grad ln rho."""
        t = sp.Symbol("t")
        coords = self._coords
        rho = self.rho_expr
        v = list(self.v_exprs)
        eps = kappa / mu

        u = [v[j] - eps * sp.diff(sp.log(rho), coords[j]) for j in range(self.dim)]
        div_rho_v = sum(sp.diff(rho * v[i], coords[i]) for i in range(self.dim))
        lap_rho = sum(sp.diff(rho, c, 2) for c in coords)
        f_rho = sp.diff(rho, t) + div_rho_v - eps * lap_rho

        f_v = []
        for j in range(self.dim):
            advect = sum(u[i] * sp.diff(v[j], coords[i]) for i in range(self.dim))
            diffusion = sum(sp.diff(mu * rho * sp.diff(v[j], coords[i]), coords[i])
                            for i in range(self.dim))
            grad_p = sp.diff(a * rho ** gamma, coords[j])
            f_v.append(sp.diff(v[j], t) + advect - (diffusion - grad_p) / rho)
        return f_rho, tuple(f_v)

    def forcing(self, grid: SpectralGrid, params: ModelParams):
        """Numeric forcing callable t -> (f_rho samples, f_v samples)."""
        f_rho_fn, f_v_fns = _compiled_forcing(self.sid, params.mu, params.kappa,
                                              params.a, params.gamma)
        mesh = grid.meshgrid()

        def apply(time: float):
            f_rho = np.broadcast_to(np.asarray(f_rho_fn(time, *mesh), dtype=float),
                                    grid.shape)
            f_v = np.stack([np.broadcast_to(np.asarray(fn(time, *mesh), dtype=float),
                                            grid.shape) for fn in f_v_fns])
            return f_rho, f_v

        return apply


def _registry() -> dict[str, ManufacturedSolution]:
    t, x, y = sp.symbols("t x y")
    ms1d = ManufacturedSolution(
        "ms1d", 1,
        sp.Rational(6, 5) + sp.Rational(7, 20) * sp.exp(
            sp.Rational(4, 5) * sp.sin(x - sp.Rational(3, 5) * t) - sp.Rational(4, 5)),
        (sp.Rational(3, 10) * sp.exp(
            sp.Rational(1, 2) * sp.cos(x - sp.Rational(9, 10) * t) - sp.Rational(1, 2))
         * sp.sin(x),))
    ms2d = ManufacturedSolution(
        "ms2d", 2,
        sp.Rational(13, 10) + sp.Rational(1, 5) * sp.exp(
            sp.Rational(1, 2) * sp.sin(x - sp.Rational(2, 5) * t) - sp.Rational(1, 2))
        * sp.cos(y),
        (sp.Rational(1, 5) * sp.sin(x + sp.Rational(3, 10) * t) * sp.cos(y),
         sp.Rational(3, 20) * sp.cos(x) * sp.sin(y - sp.Rational(1, 2) * t)))
    return {ms.sid: ms for ms in (ms1d, ms2d)}


_SOLUTIONS = _registry()


def manufactured_solution(sid: str) -> ManufacturedSolution:
    try:
        return _SOLUTIONS[sid]
    except KeyError:
        raise ValueError(f"unknown manufactured solution {sid!r}, "
                         f"expected one of {sorted(_SOLUTIONS)}") from None


@lru_cache(maxsize=16)
def _compiled_forcing(sid: str, mu: float, kappa: float, a: float, gamma: float):
    ms = manufactured_solution(sid)
    f_rho, f_v = ms.forcing_exprs(mu, kappa, a, gamma)
    t = sp.Symbol("t")
    coords = ms._coords
    f_rho_fn = sp.lambdify((t, *coords), sp.simplify(f_rho), modules="numpy")
    f_v_fns = tuple(sp.lambdify((t, *coords), sp.simplify(e), modules="numpy")
                    for e in f_v)
    return f_rho_fn, f_v_fns
