"""Periodic pseudo-spectral fields and Fourier multiplier operators.

The computational domain is the periodic box [0, L)^n with n in {2, 3}
and N grid points per axis, used as a proxy for the whole space.  A
field is stored by the amplitudes of its Fourier modes: the coefficient
at integer lattice index z is the amplitude of exp(i k0 z.x), where
k0 = 2*pi/L is the fundamental wavenumber.  Real fields therefore carry
Hermitian-symmetric coefficient arrays, and the zero mode is forced to
vanish on every field that feeds the homogeneous norms (constants are
quotiented out, matching the convention that the data live in the space
of distributions vanishing at infinity).

Discrete L^p norms use the quadrature weight (L/N)^n; p = inf is the
grid supremum.  All operators are pure: they return new fields.
"""

from __future__ import annotations

import math
import struct
from functools import cached_property

import numpy as np

from .errors import EvaluationError, ParameterError, RangeError, ShapeError

GNSF_MAGIC = b"GNSF"
GNSF_VERSION = 1


class Grid:
    """Uniform periodic grid: n axes, N points per axis, box side L."""

    def __init__(self, n: int, N: int, L: float = 2.0 * math.pi):
        if n not in (2, 3):
            raise ParameterError(f"n must be 2 or 3, got {n}")
        if N < 8 or (N & (N - 1)) != 0:
            raise ParameterError(f"N must be a power of two >= 8, got {N}")
        if not (L > 0.0) or not math.isfinite(L):
            raise ParameterError(f"L must be positive and finite, got {L}")
        self.n = int(n)
        self.N = int(N)
        self.L = float(L)

    @property
    def k0(self) -> float:
        """Fundamental wavenumber 2*pi/L."""
        return 2.0 * math.pi / self.L

    @property
    def spacing(self) -> float:
        return self.L / self.N

    @property
    def nyquist(self) -> float:
        return self.k0 * self.N / 2.0

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @cached_property
    def index_1d(self) -> np.ndarray:
        """Integer mode indices along one axis in FFT order."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N).astype(np.int64)

    @cached_property
    def k_abs(self) -> np.ndarray:
        """|k| on the full lattice."""
        sq = np.zeros(self.shape)
        for axis in range(self.n):
            sq = sq + self.k_component(axis) ** 2
        return np.sqrt(sq)

    def k_component(self, axis: int) -> np.ndarray:
        """Wavevector component k_axis broadcast over the lattice."""
        if not 0 <= axis < self.n:
            raise ParameterError(f"axis must be in [0, {self.n}), got {axis}")
        shape = [1] * self.n
        shape[axis] = self.N
        return (self.k0 * self.index_1d).reshape(shape) * np.ones(self.shape)

    def wavevector_at(self, index: tuple) -> np.ndarray:
        return self.k0 * np.array([self.index_1d[i] for i in index], dtype=float)

    def axis_coordinates(self) -> np.ndarray:
        return self.spacing * np.arange(self.N)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Grid)
            and (self.n, self.N) == (other.n, other.N)
            and math.isclose(self.L, other.L, rel_tol=1e-14)
        )

    def __hash__(self):
        return hash((self.n, self.N, round(self.L, 12)))

    def __repr__(self):
        return f"Grid(n={self.n}, N={self.N}, L={self.L!r})"


def _hermitian_mirror(coeffs: np.ndarray, n: int) -> np.ndarray:
    """conj(c(-z)) arranged on the same lattice as c(z)."""
    out = np.conj(coeffs)
    for axis in range(coeffs.ndim - n, coeffs.ndim):
        out = np.flip(out, axis=axis)
        out = np.roll(out, 1, axis=axis)
    return out


class SpectralField:
    """Mode amplitudes of a scalar (1 component) or vector (n component) field."""

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: Grid, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim != grid.n + 1:
            raise ShapeError(
                f"coefficients must have shape (c, {'N, ' * (grid.n - 1)}N), got {coeffs.shape}"
            )
        if coeffs.shape[1:] != grid.shape:
            raise ShapeError(f"lattice shape {coeffs.shape[1:]} does not match grid {grid.shape}")
        if coeffs.shape[0] not in (1, grid.n):
            raise ShapeError(
                f"component count must be 1 or {grid.n}, got {coeffs.shape[0]}"
            )
        self.grid = grid
        self.coeffs = coeffs

    # -- constructors ------------------------------------------------

    @classmethod
    def zeros(cls, grid: Grid, ncomp: int = 1) -> "SpectralField":
        return cls(grid, np.zeros((ncomp,) + grid.shape, dtype=np.complex128))

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray) -> "SpectralField":
        values = np.asarray(values, dtype=float)
        if values.ndim == grid.n:
            values = values[None]
        if values.shape[1:] != grid.shape:
            raise ShapeError(f"physical values shape {values.shape} does not match grid")
        axes = tuple(range(1, grid.n + 1))
        coeffs = np.fft.fftn(values, axes=axes) / grid.N**grid.n
        return cls(grid, coeffs)

    @classmethod
    def from_modes(cls, grid: Grid, modes: dict, ncomp: int = 1) -> "SpectralField":
        """Build a real field from mode amplitudes.

        modes maps an integer index tuple z to a complex amplitude (scalar
        fields) or a length-ncomp sequence.  For every entry the conjugate
        amplitude is placed at -z, so the physical field is
        sum_z 2 Re(a_z exp(i k0 z.x)).
        """
        field = cls.zeros(grid, ncomp)
        half = grid.N // 2
        for z, amp in modes.items():
            if len(z) != grid.n:
                raise ShapeError(f"mode index {z} has wrong dimension")
            if any(abs(c) > half for c in z):
                raise RangeError(f"mode index {z} exceeds the grid's Nyquist index {half}")
            amp = np.atleast_1d(np.asarray(amp, dtype=np.complex128))
            if amp.shape != (ncomp,):
                raise ShapeError(f"amplitude for mode {z} must have {ncomp} components")
            pos = tuple(c % grid.N for c in z)
            neg = tuple((-c) % grid.N for c in z)
            field.coeffs[(slice(None),) + pos] += amp
            field.coeffs[(slice(None),) + neg] += np.conj(amp)
        return field

    # -- basic queries -----------------------------------------------

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    @property
    def is_vector(self) -> bool:
        return self.ncomp == self.grid.n

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def to_physical(self) -> np.ndarray:
        axes = tuple(range(1, self.grid.n + 1))
        values = np.fft.ifftn(self.coeffs, axes=axes) * self.grid.N**self.grid.n
        return np.real(values)

    def zero_mode(self) -> np.ndarray:
        return self.coeffs[(slice(None),) + (0,) * self.grid.n]

    def with_zero_mean(self) -> "SpectralField":
        out = self.copy()
        out.coeffs[(slice(None),) + (0,) * self.grid.n] = 0.0
        return out

    def hermitian_defect(self) -> float:
        """Max deviation from conjugate symmetry (0 for real fields)."""
        mirror = _hermitian_mirror(self.coeffs, self.grid.n)
        return float(np.max(np.abs(self.coeffs - mirror)))

    def max_index(self, rel_tol: float = 1e-13) -> int:
        """Largest |z_i| over the numerically supported coefficients.

        Support means magnitude above rel_tol times the largest one, so
        transform rounding dust does not register as content.
        """
        top = float(np.max(np.abs(self.coeffs)))
        if top == 0.0:
            return 0
        mask = np.abs(self.coeffs) > rel_tol * top
        worst = 0
        idx = self.grid.index_1d
        for axis in range(self.grid.n):
            axes = tuple(i for i in range(self.grid.n + 1) if i != axis + 1)
            active = mask.any(axis=axes)
            if active.any():
                worst = max(worst, int(np.max(np.abs(idx[active]))))
        return worst

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean magnitude on the physical grid."""
        phys = self.to_physical()
        if self.ncomp == 1:
            return np.abs(phys[0])
        return np.sqrt(np.sum(phys**2, axis=0))

    def lp_norm(self, p: float) -> float:
        """Discrete L^p norm of the pointwise magnitude, weight (L/N)^n."""
        if not (p >= 1.0):
            raise ParameterError(f"p must be >= 1, got {p}")
        mag = self.magnitude()
        if math.isinf(p):
            return float(np.max(mag))
        weight = (self.grid.L / self.grid.N) ** self.grid.n
        return float((np.sum(mag**p) * weight) ** (1.0 / p))

    def l2_norm(self) -> float:
        return self.lp_norm(2.0)

    def inner(self, other: "SpectralField") -> float:
        """Discrete L^2 inner product, summed over components."""
        _check_same_grid(self, other)
        if self.ncomp != other.ncomp:
            raise ShapeError("component counts differ")
        weight = (self.grid.L / self.grid.N) ** self.grid.n
        return float(np.sum(self.to_physical() * other.to_physical()) * weight)

    # -- linear arithmetic --------------------------------------------

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        if self.ncomp != other.ncomp:
            raise ShapeError("component counts differ")
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        if self.ncomp != other.ncomp:
            raise ShapeError("component counts differ")
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs)

    def __repr__(self):
        return f"SpectralField(ncomp={self.ncomp}, grid={self.grid!r})"


def _check_same_grid(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise ShapeError(f"fields live on different grids: {a.grid!r} vs {b.grid!r}")


# -- multiplier symbols ------------------------------------------------


class PowerSymbol:
    """|xi|^(2 gamma); the zero mode is sent to 0 for every gamma."""

    def __init__(self, gamma: float):
        if not math.isfinite(gamma):
            raise ParameterError("gamma must be finite")
        self.gamma = float(gamma)

    def values(self, grid: Grid) -> np.ndarray:
        k = grid.k_abs
        with np.errstate(divide="ignore"):
            vals = np.where(k > 0.0, k ** (2.0 * self.gamma), 0.0)
        return vals

    def evaluate(self, xi) -> float:
        r = float(np.linalg.norm(np.atleast_1d(xi)))
        return 0.0 if r == 0.0 else r ** (2.0 * self.gamma)


class HeatSymbol:
    """exp(-t |xi|^(2 alpha)); the zero mode maps to 1."""

    def __init__(self, t: float, alpha: float):
        if t < 0.0:
            raise ParameterError(f"t must be >= 0, got {t}")
        if not alpha > 0.0:
            raise ParameterError(f"alpha must be positive, got {alpha}")
        self.t = float(t)
        self.alpha = float(alpha)

    def values(self, grid: Grid) -> np.ndarray:
        return np.exp(-self.t * grid.k_abs ** (2.0 * self.alpha))

    def evaluate(self, xi) -> float:
        r = float(np.linalg.norm(np.atleast_1d(xi)))
        return math.exp(-self.t * r ** (2.0 * self.alpha))


class ComponentSymbol:
    """i xi_axis, the symbol of the partial derivative along one axis."""

    def __init__(self, axis: int):
        self.axis = int(axis)

    def values(self, grid: Grid) -> np.ndarray:
        return 1j * grid.k_component(self.axis)

    def evaluate(self, xi) -> complex:
        return 1j * float(np.atleast_1d(xi)[self.axis])


class RadialSymbol:
    """A radial profile evaluated at |xi|; the zero mode uses profile(0)."""

    def __init__(self, profile):
        self.profile = profile

    def values(self, grid: Grid) -> np.ndarray:
        return np.asarray(self.profile(grid.k_abs))

    def evaluate(self, xi) -> float:
        r = float(np.linalg.norm(np.atleast_1d(xi)))
        return float(self.profile(np.asarray([r]))[0])


def apply_multiplier(field: SpectralField, symbol) -> SpectralField:
    """Multiply every coefficient by the symbol evaluated at its wavevector."""
    vals = np.asarray(symbol.values(field.grid))
    if vals.shape != field.grid.shape:
        raise ShapeError("symbol values have the wrong lattice shape")
    bad = ~np.isfinite(vals)
    if bad.any():
        index = tuple(int(i) for i in np.argwhere(bad)[0])
        k = field.grid.wavevector_at(index)
        raise EvaluationError(f"multiplier symbol is not finite at wavevector {k.tolist()}")
    return SpectralField(field.grid, field.coeffs * vals[None])


# -- differential and projection operators -----------------------------


def fractional_laplacian(field: SpectralField, alpha) -> SpectralField:
    """(-Laplace)^alpha via the multiplier |k|^(2 alpha); zero mode -> 0."""
    if isinstance(alpha, complex) or not isinstance(alpha, (int, float)):
        raise ParameterError("alpha must be a real number")
    alpha = float(alpha)
    if not alpha > -field.grid.n / 2.0:
        raise ParameterError(f"alpha must exceed -n/2 = {-field.grid.n / 2}, got {alpha}")
    return apply_multiplier(field, PowerSymbol(alpha))


def gradient(field: SpectralField) -> SpectralField:
    if field.ncomp != 1:
        raise ShapeError("gradient expects a scalar field")
    grid = field.grid
    comps = [field.coeffs[0] * (1j * grid.k_component(axis)) for axis in range(grid.n)]
    return SpectralField(grid, np.stack(comps))


def divergence(field: SpectralField) -> SpectralField:
    if not field.is_vector:
        raise ShapeError("divergence expects a vector field")
    grid = field.grid
    out = np.zeros(grid.shape, dtype=np.complex128)
    for axis in range(grid.n):
        out += 1j * grid.k_component(axis) * field.coeffs[axis]
    return SpectralField(grid, out[None])


def leray_project(field: SpectralField) -> SpectralField:
    """Project onto divergence-free fields: u - k (k.u)/|k|^2, zero mode kept."""
    if not field.is_vector:
        raise ShapeError("leray_project expects a vector field")
    grid = field.grid
    ksq = grid.k_abs**2
    safe = np.where(ksq > 0.0, ksq, 1.0)
    dot = np.zeros(grid.shape, dtype=np.complex128)
    for axis in range(grid.n):
        dot += grid.k_component(axis) * field.coeffs[axis]
    dot /= safe
    out = field.coeffs.copy()
    for axis in range(grid.n):
        out[axis] -= grid.k_component(axis) * dot
    zero = (0,) * grid.n
    out[(slice(None),) + zero] = field.coeffs[(slice(None),) + zero]
    return SpectralField(grid, out)


def semigroup_apply(field: SpectralField, t: float, alpha: float) -> SpectralField:
    """Apply the dissipative semigroup exp(-t (-Laplace)^alpha)."""
    return apply_multiplier(field, HeatSymbol(t, alpha))


def dilate(field: SpectralField, j: int) -> SpectralField:
    """Dilation x -> lambda x with lambda = 2^j.

    Realized by shrinking the box: the output lives on a grid with side
    L / lambda and carries the same coefficient array, so mode k moves to
    lambda k and the quadrature measure scales like lambda^(-n), exactly as
    on the whole space.  The dilate must stay inside the original grid's
    frequency budget: for j > 0 the support may not cross index N / 2^(j+1).
    """
    if not isinstance(j, (int, np.integer)):
        raise ParameterError("dilation exponent j must be an integer")
    j = int(j)
    lam = 2.0**j
    if j > 0:
        limit = field.grid.N // 2
        top = field.max_index() * (2**j)
        if top > limit:
            raise RangeError(
                f"dilate unresolved: support index {field.max_index()} times lambda={2**j} "
                f"exceeds the Nyquist index {limit}"
            )
    new_grid = Grid(field.grid.n, field.grid.N, field.grid.L / lam)
    return SpectralField(new_grid, field.coeffs.copy())


# -- grid refinement (shared by the dealiased nonlinearity) -------------


def _split_nyquist(shifted: np.ndarray, n: int, offset: int, N: int) -> None:
    """Duplicate each coarse Nyquist plane onto its positive twin, halving both."""
    for axis in range(shifted.ndim - n, shifted.ndim):
        lo = [slice(None)] * shifted.ndim
        hi = [slice(None)] * shifted.ndim
        lo[axis] = offset
        hi[axis] = offset + N
        shifted[tuple(lo)] *= 0.5
        shifted[tuple(hi)] = shifted[tuple(lo)]


def _fold_nyquist(shifted: np.ndarray, n: int, offset: int, N: int) -> None:
    """Fold each positive Nyquist plane back onto the stored negative one."""
    for axis in range(shifted.ndim - n, shifted.ndim):
        lo = [slice(None)] * shifted.ndim
        hi = [slice(None)] * shifted.ndim
        lo[axis] = offset
        hi[axis] = offset + N
        shifted[tuple(lo)] += shifted[tuple(hi)]


def refine_physical(field: SpectralField, factor: int) -> np.ndarray:
    """Evaluate the trigonometric polynomial on a factor-times finer grid."""
    if factor not in (2, 3, 4):
        raise ParameterError(f"refinement factor must be 2, 3 or 4, got {factor}")
    grid = field.grid
    N, n = grid.N, grid.n
    M = factor * N
    axes = tuple(range(1, n + 1))
    shifted = np.fft.fftshift(field.coeffs, axes=axes)
    fine = np.zeros((field.ncomp,) + (M,) * n, dtype=np.complex128)
    offset = (M - N) // 2
    block = (slice(None),) + tuple(slice(offset, offset + N) for _ in range(n))
    fine[block] = shifted
    _split_nyquist(fine, n, offset, N)
    fine = np.fft.ifftshift(fine, axes=axes)
    return np.real(np.fft.ifftn(fine, axes=axes) * M**n)


def field_from_fine_physical(grid: Grid, values: np.ndarray, factor: int) -> SpectralField:
    """Transform fine-grid physical values and truncate to the coarse lattice."""
    if factor not in (2, 3, 4):
        raise ParameterError(f"refinement factor must be 2, 3 or 4, got {factor}")
    values = np.asarray(values, dtype=float)
    if values.ndim == grid.n:
        values = values[None]
    N, n = grid.N, grid.n
    M = factor * N
    if values.shape[1:] != (M,) * n:
        raise ShapeError(f"fine values shape {values.shape} does not match factor {factor}")
    axes = tuple(range(1, n + 1))
    fine = np.fft.fftn(values, axes=axes) / M**n
    fine = np.fft.fftshift(fine, axes=axes)
    offset = (M - N) // 2
    _fold_nyquist(fine, n, offset, N)
    block = (slice(None),) + tuple(slice(offset, offset + N) for _ in range(n))
    coarse = np.fft.ifftshift(fine[block], axes=axes)
    return SpectralField(grid, coarse)


# -- binary field format ------------------------------------------------

_HEADER = struct.Struct("<4sIIIId")


def write_field(field: SpectralField, path) -> None:
    """Write a field in the GNSF binary format (little-endian)."""
    grid = field.grid
    header = _HEADER.pack(GNSF_MAGIC, GNSF_VERSION, grid.n, grid.N, field.ncomp, grid.L)
    data = np.ascontiguousarray(field.coeffs, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_field(path) -> SpectralField:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ParameterError(f"{path}: truncated header")
        magic, version, n, N, ncomp, L = _HEADER.unpack(raw)
        if magic != GNSF_MAGIC:
            raise ParameterError(f"{path}: bad magic {magic!r}")
        if version != GNSF_VERSION:
            raise ParameterError(f"{path}: unsupported version {version}")
        grid = Grid(n, N, L)
        count = ncomp * N**n
        payload = fh.read(count * 16)
        if len(payload) != count * 16:
            raise ParameterError(f"{path}: truncated payload")
        data = np.frombuffer(payload, dtype="<c16")
        coeffs = data.reshape((ncomp,) + grid.shape).astype(np.complex128)
    return SpectralField(grid, coeffs)
