"""Truncated Fourier fields on T^2 and pseudo-spectral operations on them.

Coefficients are stored as the full ``N x N`` array returned by ``numpy.fft.fft2``
divided by ``N^2``, so ``coeffs[n, m]`` (negative indices wrap) is the amplitude of
``exp(i(nx + my))``. Grid points are ``x_i = 2 pi i / N`` with ``indexing="ij"``:
axis 0 is x, axis 1 is y. The measure is ``dx dy`` with total volume (2 pi)^2.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatchError
from .trig import COS, Phase, TrigMode, TrigPolynomial

VOLUME = (2.0 * np.pi) ** 2
HERMITIAN_TOL = 1e-12


class Dealias(str, Enum):
    NONE = "none"
    TWO_THIRDS = "two_thirds"


@dataclass(frozen=True)
class GridSpec:
    N: int
    dealias: Dealias = Dealias.TWO_THIRDS

    def __post_init__(self):
        if self.N < 16 or self.N % 2:
            raise ValueError(f"grid resolution must be an even integer >= 16, got {self.N}")
        object.__setattr__(self, "dealias", Dealias(self.dealias))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.N, d=1.0 / self.N)

    @cached_property
    def kx(self) -> np.ndarray:
        return self.wavenumbers[:, None] * np.ones((1, self.N))

    @cached_property
    def ky(self) -> np.ndarray:
        return np.ones((self.N, 1)) * self.wavenumbers[None, :]

    @cached_property
    def kx_deriv(self) -> np.ndarray:
        # the Nyquist mode has no real derivative
        k = np.where(np.abs(self.kx) == self.N // 2, 0.0, self.kx)
        return k

    @cached_property
    def ky_deriv(self) -> np.ndarray:
        return np.where(np.abs(self.ky) == self.N // 2, 0.0, self.ky)

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kx ** 2 + self.ky ** 2

    @cached_property
    def inv_k2(self) -> np.ndarray:
        k2 = self.k2.copy()
        k2[0, 0] = 1.0
        out = 1.0 / k2
        out[0, 0] = 0.0
        return out

    @cached_property
    def mask(self) -> np.ndarray:
        """True where coefficients are kept after dealiasing."""
        if self.dealias is Dealias.NONE:
            return np.ones((self.N, self.N), dtype=bool)
        kmax = np.maximum(np.abs(self.kx), np.abs(self.ky))
        return kmax <= self.N / 3.0

    @cached_property
    def band_limit(self) -> int:
        """Largest wavenumber for which products of two fields stay unaliased."""
        return int(self.N // 6) if self.dealias is Dealias.TWO_THIRDS else int(self.N // 4)

    # half-spectrum (rfft2 layout) views used by the time stepper
    @cached_property
    def half(self) -> slice:
        return np.s_[:, : self.N // 2 + 1]

    @cached_property
    def kx_half(self) -> np.ndarray:
        return self.kx_deriv[self.half]

    @cached_property
    def ky_half(self) -> np.ndarray:
        return self.ky_deriv[self.half]

    @cached_property
    def inv_k2_half(self) -> np.ndarray:
        return self.inv_k2[self.half]

    @cached_property
    def mask_half(self) -> np.ndarray:
        return self.mask[self.half]

    @cached_property
    def points(self) -> tuple[np.ndarray, np.ndarray]:
        x = 2.0 * np.pi * np.arange(self.N) / self.N
        return np.meshgrid(x, x, indexing="ij")


def _hermitize(c: np.ndarray) -> np.ndarray:
    # index of -k along an fft axis is (-k) mod N
    flipped = np.roll(np.flip(c, axis=(0, 1)), shift=1, axis=(0, 1))
    out = 0.5 * (c + np.conj(flipped))
    out[0, 0] = 0.0
    return out


def hermitian_defect(c: np.ndarray) -> float:
    flipped = np.roll(np.flip(c, axis=(0, 1)), shift=1, axis=(0, 1))
    return float(np.max(np.abs(c - np.conj(flipped)), initial=0.0))


@dataclass(frozen=True, eq=False)
class SpectralField:
    coeffs: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.N, self.grid.N):
            raise GridMismatchError(f"coefficient array shape {c.shape} does not match N={self.grid.N}")
        c = _hermitize(c)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        return cls(np.zeros((grid.N, grid.N), dtype=complex), grid)

    def coeff(self, n: int, m: int) -> complex:
        return complex(self.coeffs[n % self.grid.N, m % self.grid.N])

    def __add__(self, other):
        _same_grid(self, other)
        return SpectralField(self.coeffs + other.coeffs, self.grid)

    def __sub__(self, other):
        _same_grid(self, other)
        return SpectralField(self.coeffs - other.coeffs, self.grid)

    def __mul__(self, scalar):
        return SpectralField(self.coeffs * float(scalar), self.grid)

    __rmul__ = __mul__

    def max_abs_coeff(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))


def _same_grid(*fields: SpectralField):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError(f"grid mismatch: {g} vs {f.grid}")


def to_grid(f: SpectralField) -> np.ndarray:
    N = f.grid.N
    return np.real(np.fft.ifft2(f.coeffs * (N * N)))


def from_grid(values, grid: GridSpec) -> SpectralField:
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.N, grid.N):
        raise GridMismatchError(f"grid values shape {values.shape} does not match N={grid.N}")
    return SpectralField(np.fft.fft2(values) / (grid.N * grid.N), grid)


def from_trig(f: TrigPolynomial, grid: GridSpec) -> SpectralField:
    """Place a q=1 trig polynomial's coefficients directly (no sampling)."""
    if f.q != 1:
        raise GridMismatchError("spectral fields live on T^2 (q=1)")
    N = grid.N
    c = np.zeros((N, N), dtype=complex)
    for mode, a in f.terms.items():
        n, m = mode.n[0], mode.m[0]
        if max(abs(n), abs(m)) >= N // 2:
            raise GridMismatchError(f"mode {mode} is not resolved on an N={N} grid")
        # cos A = (e^{iA} + e^{-iA})/2, sin A = (e^{iA} - e^{-iA})/(2i)
        w = 0.5 * a if mode.phase is COS else -0.5j * a
        c[n % N, m % N] += w
        c[-n % N, -m % N] += np.conj(w)
    c[0, 0] = 0.0
    return SpectralField(c, grid)


def to_trig(f: SpectralField, tol: float = 1e-14) -> TrigPolynomial:
    """Inverse of :func:`from_trig` on resolved modes; drops coefficients below ``tol``."""
    N = f.grid.N
    terms = {}
    for i in range(N):
        for j in range(N):
            n, m = int(f.grid.wavenumbers[i]), int(f.grid.wavenumbers[j])
            if (n, m) == (0, 0) or abs(n) == N // 2 or abs(m) == N // 2:
                continue
            if n < 0 or (n == 0 and m < 0):
                continue
            w = f.coeffs[i, j]
            if abs(w) <= tol:
                continue
            terms[((n,), (m,), "cos")] = 2.0 * w.real
            terms[((n,), (m,), "sin")] = -2.0 * w.imag
    return TrigPolynomial([(TrigMode(n, m, Phase(p)), c) for (n, m, p), c in terms.items()], q=1)


def _derivatives(coeffs: np.ndarray, grid: GridSpec):
    scale = grid.N * grid.N
    fx = np.real(np.fft.ifft2(1j * grid.kx_deriv * coeffs * scale))
    fy = np.real(np.fft.ifft2(1j * grid.ky_deriv * coeffs * scale))
    return fx, fy


def _bracket_array(f: np.ndarray, h: np.ndarray, grid: GridSpec) -> np.ndarray:
    fx, fy = _derivatives(f, grid)
    hx, hy = _derivatives(h, grid)
    out = np.fft.fft2(fy * hx - fx * hy) / (grid.N * grid.N)
    out[~grid.mask] = 0.0
    out[0, 0] = 0.0
    return out


def to_half(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.array(coeffs[grid.half])


def from_half(half: np.ndarray, grid: GridSpec) -> SpectralField:
    n2 = grid.N * grid.N
    values = sfft.irfft2(half * n2, s=(grid.N, grid.N))
    return SpectralField(sfft.fft2(values) / n2, grid)


def _bracket_half(f: np.ndarray, h: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Dealiased bracket on half-spectrum arrays; one batched inverse transform."""
    n2 = grid.N * grid.N
    stack = np.stack([grid.kx_half * f, grid.ky_half * f, grid.kx_half * h, grid.ky_half * h])
    fx, fy, hx, hy = sfft.irfft2(1j * n2 * stack, s=(grid.N, grid.N), axes=(-2, -1))
    out = sfft.rfft2(fy * hx - fx * hy) / n2
    out[~grid.mask_half] = 0.0
    out[0, 0] = 0.0
    return out


def dealias(f: SpectralField) -> SpectralField:
    return SpectralField(np.where(f.grid.mask, f.coeffs, 0.0), f.grid)


def bracket_ps(f: SpectralField, h: SpectralField) -> SpectralField:
    """Pseudo-spectral ``{f, h} = f_y h_x - f_x h_y``, then dealiased.

    Exact (to rounding) only when both inputs are band-limited to
    ``grid.band_limit``; outside that band the result carries truncation error.
    """
    _same_grid(f, h)
    return SpectralField(_bracket_array(f.coeffs, h.coeffs, f.grid), f.grid)


def laplacian_sf(f: SpectralField) -> SpectralField:
    return SpectralField(f.coeffs * f.grid.k2, f.grid)


def inverse_laplacian_sf(f: SpectralField) -> SpectralField:
    return SpectralField(f.coeffs * f.grid.inv_k2, f.grid)


def integrate(f: SpectralField, g: SpectralField) -> float:
    """Parseval pairing: integral of f*g over T^2."""
    _same_grid(f, g)
    return float(VOLUME * np.sum(f.coeffs * np.conj(g.coeffs)).real)


def riemann_sum(values: np.ndarray) -> float:
    """Grid quadrature of a sampled function over T^2."""
    N = values.shape[0]
    return float(values.sum() * VOLUME / (N * N))
