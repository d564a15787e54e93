"""Dyadic frequency decomposition and homogeneous Besov norms.

A smooth radial profile phi supported in the annulus (3/4, 8/3) is built
from a fixed smooth step chi (1 below 3/4, 0 above 4/3) by the telescoping
difference phi(r) = chi(r/2) - chi(r), so that sum_q phi(2^-q r) = 1 holds
exactly for every r > 0: the sum collapses to chi(2^-Q r) - chi(2^Q r) for
large Q.  On a grid only the blocks whose annuli fit between the
fundamental wavenumber and the Nyquist wavenumber are resolved; norms sum
over that range, and callers that need exact reconstruction keep their
spectra inside the band where every contributing block is resolved.

The norm of f in B^s_{p,r} is the l^r norm over resolved blocks q of
2^(q s) times the discrete L^p norm of the block field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ParameterError, RangeError
from .spectral_core import Grid, SpectralField

SUPPORT_LO = 0.75
SUPPORT_HI = 8.0 / 3.0
_CHI_HI = 4.0 / 3.0  # chi falls from 1 to 0 on (3/4, 4/3); then 2*_CHI_HI = SUPPORT_HI


def _bump(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0.0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_step(s) -> np.ndarray:
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, strictly monotone between."""
    s = np.asarray(s, dtype=float)
    a = _bump(s)
    b = _bump(1.0 - s)
    return a / (a + b + (a + b == 0.0))


def chi(r) -> np.ndarray:
    """Radial cut: 1 on [0, 3/4], 0 on [4/3, inf), smooth decrease between."""
    r = np.asarray(r, dtype=float)
    return 1.0 - smooth_step((r - SUPPORT_LO) / (_CHI_HI - SUPPORT_LO))


def phi_profile(r) -> np.ndarray:
    """Annulus profile phi(r) = chi(r/2) - chi(r), supported in (3/4, 8/3)."""
    r = np.asarray(r, dtype=float)
    return chi(r / 2.0) - chi(r)


def partition_sum(r) -> np.ndarray:
    """sum_q phi(2^-q r) over all q that can contribute (equals 1 for r > 0)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.zeros_like(r)
    pos = r > 0.0
    if pos.any():
        q_lo = np.floor(np.log2(r[pos] / SUPPORT_HI)).astype(int) - 1
        q_hi = np.ceil(np.log2(r[pos] / SUPPORT_LO)).astype(int) + 1
        acc = np.zeros(pos.sum())
        for offset in range(int(np.max(q_hi - q_lo)) + 1):
            q = q_lo + offset
            live = q <= q_hi
            acc[live] += phi_profile(r[pos][live] / 2.0 ** q[live])
        out[pos] = acc
    return out


@dataclass(frozen=True)
class BesovIndex:
    """Regularity s, integrability p, summation index r (p, r may be inf)."""

    s: float
    p: float
    r: float

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise ParameterError(f"s must be finite, got {self.s}")
        if not self.p >= 1.0:
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if not self.r >= 1.0:
            raise ParameterError(f"r must be >= 1, got {self.r}")


class DyadicCutoff:
    """Tabulated annulus profile plus the resolved block range of a grid."""

    def __init__(self, grid: Grid, q_min: int, q_max: int, table_points: int = 4096):
        self.grid = grid
        self.q_min = int(q_min)
        self.q_max = int(q_max)
        self.r_table = np.linspace(0.0, SUPPORT_HI * 1.25, table_points)
        self.phi_table = phi_profile(self.r_table)

    def phi(self, r) -> np.ndarray:
        return phi_profile(r)

    @property
    def resolved_range(self) -> range:
        return range(self.q_min, self.q_max + 1)

    @property
    def block_count(self) -> int:
        return self.q_max - self.q_min + 1

    def safe_band(self) -> tuple:
        """|k| band whose every contributing block is resolved."""
        return (2.0**self.q_min * 4.0 / 3.0, 2.0**self.q_max * 1.5)

    def block_multipliers(self) -> np.ndarray:
        """phi(2^-q |k|) stacked over the resolved range, shape (Q, N, ..., N)."""
        k = self.grid.k_abs
        return np.stack(
            [phi_profile(k / 2.0**q) for q in self.resolved_range]
        )

    def __repr__(self):
        return f"DyadicCutoff(q_min={self.q_min}, q_max={self.q_max}, grid={self.grid!r})"


def build_cutoff(grid: Grid, min_blocks: int = 3) -> DyadicCutoff:
    """Resolve the dyadic block range of a grid.

    q_min is the smallest q whose annulus sits at or above the fundamental
    wavenumber; q_max the largest whose annulus stays at or below Nyquist.
    """
    k0 = grid.k0
    q_min = math.ceil(math.log2(k0 / SUPPORT_LO) - 1e-12)
    q_max = math.floor(math.log2(grid.nyquist / SUPPORT_HI) + 1e-12)
    if q_max - q_min + 1 < min_blocks:
        raise ConfigurationError(
            f"grid {grid!r} resolves only {max(0, q_max - q_min + 1)} dyadic blocks; "
            f"at least {min_blocks} required"
        )
    return DyadicCutoff(grid, q_min, q_max)


def _require_zero_mean(field: SpectralField) -> None:
    dc = np.max(np.abs(field.zero_mode()))
    scale = 1.0 + float(np.max(np.abs(field.coeffs)))
    if dc > 1e-10 * scale:
        raise ParameterError(
            f"field must have zero mean for homogeneous norms (zero mode {dc:g}); "
            "project it out first"
        )


def dyadic_block(field: SpectralField, q: int, cutoff: DyadicCutoff) -> SpectralField:
    """Restrict a field to dyadic block q via the annulus multiplier."""
    if field.grid != cutoff.grid:
        raise ParameterError("cutoff was built for a different grid")
    if not (cutoff.q_min <= q <= cutoff.q_max):
        raise RangeError(
            f"block {q} outside the resolved range [{cutoff.q_min}, {cutoff.q_max}]"
        )
    mult = phi_profile(field.grid.k_abs / 2.0**q)
    return SpectralField(field.grid, field.coeffs * mult[None])


def block_lp_norms(field: SpectralField, cutoff: DyadicCutoff, p: float) -> np.ndarray:
    """L^p norms of every resolved block, batched through one inverse FFT."""
    if field.grid != cutoff.grid:
        raise ParameterError("cutoff was built for a different grid")
    grid = field.grid
    mults = cutoff.block_multipliers()  # (Q, lattice)
    stack = mults[:, None] * field.coeffs[None]  # (Q, c, lattice)
    axes = tuple(range(2, grid.n + 2))
    phys = np.real(np.fft.ifftn(stack, axes=axes) * grid.N**grid.n)
    mag = np.sqrt(np.sum(phys**2, axis=1)) if field.ncomp > 1 else np.abs(phys[:, 0])
    flat = mag.reshape(mag.shape[0], -1)
    if math.isinf(p):
        return np.max(flat, axis=1)
    weight = (grid.L / grid.N) ** grid.n
    return (np.sum(flat**p, axis=1) * weight) ** (1.0 / p)


def besov_norm(field: SpectralField, index: BesovIndex, cutoff: DyadicCutoff) -> float:
    """Homogeneous Besov norm over the resolved block range."""
    _require_zero_mean(field)
    norms = block_lp_norms(field, cutoff, index.p)
    qs = np.arange(cutoff.q_min, cutoff.q_max + 1, dtype=float)
    weighted = 2.0 ** (qs * index.s) * norms
    if math.isinf(index.r):
        return float(np.max(weighted)) if weighted.size else 0.0
    return float(np.sum(weighted**index.r) ** (1.0 / index.r))


def reconstruct(field: SpectralField, cutoff: DyadicCutoff) -> SpectralField:
    """Sum of all resolved blocks (equals the field inside the safe band)."""
    mults = cutoff.block_multipliers()
    total = np.sum(mults, axis=0)
    return SpectralField(field.grid, field.coeffs * total[None])


_SPHERE_AREA = {2: 2.0 * math.pi, 3: 4.0 * math.pi}


def difference_norm(
    field: SpectralField,
    index: BesovIndex,
    k: int,
    shift_samples: int = 400,
    rng=None,
) -> float:
    """Monte-Carlo estimate of the finite-difference characterization.

    Estimates ( integral over shifts y of ||D_y^k f||_p^r / |y|^(s r + n) )^(1/r),
    where D_y is the periodic forward difference f(. + y) - f(.), applied k
    times; each shift acts exactly through the phase factor
    (exp(i k.y) - 1)^k on the coefficients.  Shift radii are drawn
    log-uniformly between the grid spacing and half the box, directions
    uniformly on the sphere.  Requires 0 < s < k.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ParameterError(f"difference order k must be a positive integer, got {k}")
    if not 0.0 < index.s < k:
        raise ParameterError(
            f"difference characterization needs 0 < s < k, got s={index.s}, k={k}"
        )
    if shift_samples < 100:
        raise ConfigurationError(
            f"shift_samples must be at least 100, got {shift_samples}"
        )
    _require_zero_mean(field)
    rng = np.random.default_rng(rng)
    grid = field.grid
    n = grid.n
    lo, hi = grid.spacing, grid.L / 2.0
    radii = np.exp(rng.uniform(math.log(lo), math.log(hi), size=shift_samples))
    if n == 2:
        theta = rng.uniform(0.0, 2.0 * math.pi, size=shift_samples)
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    else:
        gauss = rng.normal(size=(shift_samples, 3))
        dirs = gauss / np.linalg.norm(gauss, axis=1, keepdims=True)
    shifts = radii[:, None] * dirs

    kmesh = np.stack([grid.k_component(axis) for axis in range(n)])
    weight = (grid.L / grid.N) ** n
    p = index.p
    norms = np.empty(shift_samples)
    chunk = 64
    for start in range(0, shift_samples, chunk):
        ys = shifts[start : start + chunk]
        phase = np.tensordot(ys, kmesh, axes=(1, 0))  # (chunk, lattice)
        factor = (np.exp(1j * phase) - 1.0) ** k
        stack = factor[:, None] * field.coeffs[None]
        axes = tuple(range(2, n + 2))
        phys = np.real(np.fft.ifftn(stack, axes=axes) * grid.N**n)
        mag = np.sqrt(np.sum(phys**2, axis=1)) if field.ncomp > 1 else np.abs(phys[:, 0])
        flat = mag.reshape(mag.shape[0], -1)
        if math.isinf(p):
            norms[start : start + len(ys)] = np.max(flat, axis=1)
        else:
            norms[start : start + len(ys)] = (np.sum(flat**p, axis=1) * weight) ** (1.0 / p)

    if math.isinf(index.r):
        return float(np.max(norms / radii**index.s))
    geom = _SPHERE_AREA[n] * math.log(hi / lo)
    mean = np.mean(norms**index.r / radii ** (index.s * index.r))
    return float((geom * mean) ** (1.0 / index.r))


def norm_record(field_id: str, index: BesovIndex, cutoff: DyadicCutoff, value: float) -> dict:
    """One JSON-lines record for a Besov norm evaluation."""
    return {
        "field_id": field_id,
        "s": float(index.s),
        "p": float(index.p),
        "r": float(index.r),
        "q_min": cutoff.q_min,
        "q_max": cutoff.q_max,
        "value": float(value),
    }
