"""Discrete calculus on the periodic torus T^N (N = 1 or 2).

Fields are sampled on a uniform grid and differentiated in Fourier space:
a mode e^{i beta.x} picks up the multiplier (i beta_j) per axis, so
derivatives of trigonometric polynomials under the Nyquist limit are exact
to roundoff.  Conventions:

* coefficients follow u(x) = sum_beta u_hat(beta) e^{i beta.x} with
  u_hat(beta) = (1/|T^N|) \\int e^{-i beta.y} u(y) dy, realized by the DFT,
* the Nyquist mode is zeroed in every derivative multiplier (odd-order
  derivatives are ill-defined there),
* quadrature is the rectangle rule, i.e. spectral mean times volume, exact
  for trigonometric polynomials under the Nyquist limit,
* dealiasing is the 2/3 rule: after a nonlinear product, every coefficient
  with any |k_j| above floor(n_j/3) is zeroed.

Resolutions are powers of two so dyadic frequency shells align with
representable wavenumbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidField

TAU = 2.0 * math.pi

_MIN_RESOLUTION = 8


def _as_tuple(value, n=None, kind=float):
    if np.isscalar(value):
        value = (value,) if n is None else (value,) * n
    out = tuple(kind(v) for v in value)
    return out


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid with its wavenumber lattice and transform helpers.

    ``resolution`` is the number of samples per axis (power of two, >= 8),
    ``length`` the period per axis (default 2*pi).  The dual lattice carries
    wavenumbers beta_j = 2*pi*k_j/L_j in FFT ordering; it is symmetric
    (beta present implies -beta present) except for the Nyquist mode, which
    derivative multipliers zero.

    Instances are immutable; the cached multiplier tables are safe to share
    between threads once constructed.
    """

    resolution: tuple[int, ...]
    length: tuple[float, ...]

    def __init__(self, resolution, length=None):
        res = _as_tuple(resolution, kind=int)
        if length is None:
            length = TAU
        len_ = _as_tuple(length, n=len(res), kind=float)
        if len(res) not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {len(res)}")
        if len(len_) != len(res):
            raise ValueError("length and resolution dimensions differ")
        for n in res:
            if n < _MIN_RESOLUTION or not _is_power_of_two(n):
                raise ValueError(
                    f"resolution must be a power of two >= {_MIN_RESOLUTION}, got {n}")
        for L in len_:
            if not (L > 0.0):
                raise ValueError(f"domain length must be positive, got {L}")
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "length", len_)

    @property
    def dim(self) -> int:
        return len(self.resolution)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.resolution

    @cached_property
    def volume(self) -> float:
        return float(np.prod(self.length))

    @cached_property
    def cell_volume(self) -> float:
        return self.volume / float(np.prod(self.resolution))

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.length, self.resolution))

    def axes(self) -> list[np.ndarray]:
        """Sample coordinates per axis, [0, L) with n points."""
        return [np.arange(n) * (L / n) for n, L in zip(self.resolution, self.length)]

    def meshgrid(self) -> list[np.ndarray]:
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def _broadcast_axis(self, arr: np.ndarray, axis: int) -> np.ndarray:
        shape = [1] * self.dim
        shape[axis] = self.resolution[axis]
        return arr.reshape(shape)

    @cached_property
    def beta_axes(self) -> list[np.ndarray]:
        """Raw wavenumbers per axis in FFT order, broadcast-ready."""
        out = []
        for axis, (n, L) in enumerate(zip(self.resolution, self.length)):
            k = np.fft.fftfreq(n, d=1.0 / n)  # integer indices
            out.append(self._broadcast_axis(k * (TAU / L), axis))
        return out

    @cached_property
    def derivative_axes(self) -> list[np.ndarray]:
        """Wavenumbers per axis with the Nyquist entry zeroed."""
        out = []
        for axis, (n, L) in enumerate(zip(self.resolution, self.length)):
            k = np.fft.fftfreq(n, d=1.0 / n)
            k[n // 2] = 0.0
            out.append(self._broadcast_axis(k * (TAU / L), axis))
        return out

    @cached_property
    def minus_beta_sq(self) -> np.ndarray:
        """Laplacian multiplier -|beta|^2 (Nyquist-zeroed, so it equals div o grad)."""
        total = np.zeros(self.shape)
        for b in self.derivative_axes:
            total = total + b * b
        return -total

    @cached_property
    def beta_magnitude(self) -> np.ndarray:
        """|beta| over the full lattice (Nyquist included), used by dyadic shells."""
        total = np.zeros(self.shape)
        for b in self.beta_axes:
            total = total + b * b
        return np.sqrt(total)

    @cached_property
    def dealias_keep(self) -> np.ndarray:
        """Boolean mask of modes kept by the 2/3 rule (|k_j| <= floor(n_j/3))."""
        keep = np.ones(self.shape, dtype=bool)
        for axis, n in enumerate(self.resolution):
            k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
            cutoff = n // 3
            keep &= self._broadcast_axis(k <= cutoff, axis)
        return keep

    def scalar(self, data) -> "ScalarField":
        return ScalarField(self, data)

    def vector(self, *components) -> "VectorField":
        if len(components) == 1 and np.asarray(components[0]).ndim == self.dim + 1:
            return VectorField(self, components[0])
        return VectorField(self, np.stack([np.asarray(c, dtype=float) for c in components]))

    def zeros(self) -> "ScalarField":
        return ScalarField(self, np.zeros(self.shape))

    def zero_vector(self) -> "VectorField":
        return VectorField(self, np.zeros((self.dim,) + self.shape))

    def constant(self, value: float) -> "ScalarField":
        return ScalarField(self, np.full(self.shape, float(value)))

    def from_function(self, fn) -> "ScalarField":
        """Sample ``fn(*coords)`` on the grid."""
        return ScalarField(self, np.asarray(fn(*self.meshgrid()), dtype=float))


def _check_samples(grid: SpectralGrid, data: np.ndarray, lead: tuple[int, ...]):
    expected = lead + grid.shape
    if data.shape != expected:
        raise InvalidField(
            f"sample array has shape {data.shape}, expected {expected}")


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real rank-0 samples on a SpectralGrid (row-major axis order)."""

    grid: SpectralGrid
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        _check_samples(self.grid, data, ())
        object.__setattr__(self, "data", data)

    rank = 0

    def with_data(self, data) -> "ScalarField":
        return ScalarField(self.grid, data)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Real rank-1 samples, component-major: data[j] is the j-th component."""

    grid: SpectralGrid
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        _check_samples(self.grid, data, (self.grid.dim,))
        object.__setattr__(self, "data", data)

    rank = 1

    def component(self, j: int) -> ScalarField:
        return ScalarField(self.grid, self.data[j])

    def with_data(self, data) -> "VectorField":
        return VectorField(self.grid, data)

    def magnitude(self) -> ScalarField:
        return ScalarField(self.grid, np.sqrt(np.sum(self.data ** 2, axis=0)))


@dataclass(frozen=True, eq=False)
class TensorField:
    """Real rank-2 samples, data[i, j] holds component T_ij."""

    grid: SpectralGrid
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        _check_samples(self.grid, data, (self.grid.dim, self.grid.dim))
        object.__setattr__(self, "data", data)

    rank = 2

    def with_data(self, data) -> "TensorField":
        return TensorField(self.grid, data)


Field = ScalarField | VectorField | TensorField


def _require_finite(data: np.ndarray):
    if not np.all(np.isfinite(data)):
        raise InvalidField("field contains non-finite samples")


# ---------------------------------------------------------------------------
# transforms


def forward_transform(f: ScalarField) -> np.ndarray:
    """Fourier coefficients u_hat(beta) (FFT layout, normalized by 1/|T^N| measure).

    A constant field c maps to u_hat(0) = c with every other coefficient zero.
    """
    _require_finite(f.data)
    return np.fft.fftn(f.data) / f.data.size


def inverse_transform(grid: SpectralGrid, coeffs: np.ndarray) -> ScalarField:
    """Evaluate sum_beta u_hat(beta) e^{i beta.x} on the grid (real part)."""
    if coeffs.shape != grid.shape:
        raise InvalidField(
            f"coefficient array has shape {coeffs.shape}, expected {grid.shape}")
    return ScalarField(grid, np.fft.ifftn(coeffs * coeffs.size).real)


def spectral_mean(f: ScalarField) -> float:
    return float(np.mean(f.data))


# ---------------------------------------------------------------------------
# derivative operators (pure spectral multipliers, Nyquist zeroed)


def gradient(f: ScalarField) -> VectorField:
    """Gradient via multiplication by i*beta_j per axis."""
    _require_finite(f.data)
    grid = f.grid
    fhat = np.fft.fftn(f.data)
    comps = [np.fft.ifftn(1j * b * fhat).real for b in grid.derivative_axes]
    return VectorField(grid, np.stack(comps))


def divergence(F: VectorField) -> ScalarField:
    _require_finite(F.data)
    grid = F.grid
    out = np.zeros(grid.shape)
    for j, b in enumerate(grid.derivative_axes):
        out = out + np.fft.ifftn(1j * b * np.fft.fftn(F.data[j])).real
    return ScalarField(grid, out)


def laplacian(f: ScalarField) -> ScalarField:
    _require_finite(f.data)
    grid = f.grid
    return ScalarField(grid, np.fft.ifftn(grid.minus_beta_sq * np.fft.fftn(f.data)).real)


def hessian(f: ScalarField) -> TensorField:
    """Second derivatives, component (i, j) = d_i d_j f (multiplier -beta_i beta_j)."""
    _require_finite(f.data)
    grid = f.grid
    fhat = np.fft.fftn(f.data)
    d = grid.dim
    out = np.empty((d, d) + grid.shape)
    for i in range(d):
        for j in range(i, d):
            comp = np.fft.ifftn(-(grid.derivative_axes[i] * grid.derivative_axes[j]) * fhat).real
            out[i, j] = comp
            out[j, i] = comp
    return TensorField(grid, out)


def vector_gradient(F: VectorField) -> TensorField:
    """Velocity-gradient tensor, component (i, j) = d_i F_j."""
    _require_finite(F.data)
    grid = F.grid
    d = grid.dim
    out = np.empty((d, d) + grid.shape)
    for j in range(d):
        fhat = np.fft.fftn(F.data[j])
        for i in range(d):
            out[i, j] = np.fft.ifftn(1j * grid.derivative_axes[i] * fhat).real
    return TensorField(grid, out)


def tensor_divergence(T: TensorField) -> VectorField:
    """Row-contracted divergence, component j = sum_i d_i T_ij."""
    _require_finite(T.data)
    grid = T.grid
    d = grid.dim
    out = np.zeros((d,) + grid.shape)
    for j in range(d):
        acc = np.zeros(grid.shape)
        for i in range(d):
            acc = acc + np.fft.ifftn(1j * grid.derivative_axes[i] * np.fft.fftn(T.data[i, j])).real
        out[j] = acc
    return VectorField(grid, out)


# ---------------------------------------------------------------------------
# quadrature and norms


def integrate(f: ScalarField) -> float:
    """Rectangle-rule integral = |T^N| * u_hat(0); exact for resolved trig polynomials."""
    _require_finite(f.data)
    return float(np.mean(f.data) * f.grid.volume)


def lp_norm(f: Field, p: float) -> float:
    """Discrete L^p norm: cell-volume-weighted lattice sum; p = inf is the max.

    Vector fields are measured through their pointwise Euclidean magnitude.
    """
    if p < 1:
        raise ValueError(f"L^p norm requires p >= 1, got {p}")
    data = f.data if f.rank == 0 else np.sqrt(np.sum(f.data ** 2, axis=0))
    if math.isinf(p):
        return float(np.max(np.abs(data)))
    return float((np.sum(np.abs(data) ** p) * f.grid.cell_volume) ** (1.0 / p))


def l2_inner(f: ScalarField, g: ScalarField) -> float:
    return float(np.sum(f.data * g.data) * f.grid.cell_volume)


def vector_l2_inner(F: VectorField, G: VectorField) -> float:
    return float(np.sum(F.data * G.data) * F.grid.cell_volume)


def relative_l2_gap(a: Field, b: Field) -> float:
    """|a - b|_L2 / max(|a|_L2, |b|_L2), 0 when both vanish."""
    diff = float(np.sqrt(np.sum((a.data - b.data) ** 2)))
    scale = max(float(np.sqrt(np.sum(a.data ** 2))),
                float(np.sqrt(np.sum(b.data ** 2))))
    if scale == 0.0:
        return 0.0
    return diff / scale


# ---------------------------------------------------------------------------
# dealiasing


def dealias(f: Field) -> Field:
    """Zero every coefficient with any |k_j| above the 2/3-rule cutoff.

    Applied after nonlinear products so aliased images (which land above the
    cutoff when the factors were below it) never pollute retained modes.
    """
    grid = f.grid
    keep = grid.dealias_keep
    if f.rank == 0:
        return f.with_data(np.fft.ifftn(np.fft.fftn(f.data) * keep).real)
    flat = f.data.reshape((-1,) + grid.shape)
    out = np.stack([np.fft.ifftn(np.fft.fftn(c) * keep).real for c in flat])
    return f.with_data(out.reshape(f.data.shape))


def dealiased_product(a: ScalarField, b: ScalarField) -> ScalarField:
    return dealias(ScalarField(a.grid, a.data * b.data))
