"""Spherical side: harmonics in canonical (z, phi) coordinates, exact 3j symbols,
structure constants of the bracket algebra in the harmonic basis, and the
quadrature used to cross-check them.

Conventions
-----------
* Unit sphere, symplectic form ``dz ^ dphi`` (total area 4 pi), Laplace
  eigenvalue of degree ``l`` is ``l(l+1)``.
* ``Y_{lm}(z, phi) = (-1)^l / (2^l l!) sqrt((2l+1)(l-m)! / (4 pi (l+m)!))
  e^{i m phi} (1-z^2)^{m/2} d^{l+m}/dz^{l+m} (1-z^2)^l`` for all ``-l <= m <= l``.
  This basis has no Condon-Shortley phase; ``conj(Y_{lm}) = (-1)^m Y_{l,-m}``.
* Bracket ``{F, H} = dH/dz dF/dphi - dH/dphi dF/dz``.

Real Hamiltonians are built from the complex basis by :func:`real_harmonic`:
``m > 0`` gives ``sqrt(2) Re Y_{lm}``, ``m < 0`` gives ``sqrt(2) Im Y_{l|m|}``, and
``m = 0`` gives ``Y_{l0}``. Each is a unit-norm Laplace eigenfunction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import numpy as np
from numpy.polynomial import polynomial as npoly

from .curvature import CurvatureReport, Formula, k_from_structure_constants
from .errors import DegeneratePlaneError, DomainError, FormulaTranscriptionError, IncompleteBasisError

FOUR_PI = 4.0 * math.pi
VALIDATION_TOL = 1e-6

Expansion = Mapping[tuple[int, int], complex]


@dataclass(frozen=True, order=True)
class SphericalIndex:
    l: int
    m: int

    def __post_init__(self):
        if self.l < 0 or abs(self.m) > self.l:
            raise ValueError(f"invalid spherical index (l={self.l}, m={self.m})")

    @classmethod
    def parse(cls, text: str) -> "SphericalIndex":
        l, m = (int(a) for a in text.split(","))
        return cls(l, m)

    @property
    def eigenvalue(self) -> int:
        return self.l * (self.l + 1)


# -- Wigner 3j -----------------------------------------------------------------

@lru_cache(maxsize=None)
def wigner3j_exact(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> tuple[int, Fraction]:
    """Return ``(sign, square)`` with 3j = sign * sqrt(square), exactly.

    Racah's single-sum formula; ``sign`` is 0 when a selection rule fails.
    """
    if m1 + m2 + m3 != 0:
        return 0, Fraction(0)
    if min(j1, j2, j3) < 0 or abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0, Fraction(0)
    if j3 > j1 + j2 or j3 < abs(j1 - j2):
        return 0, Fraction(0)
    f = math.factorial
    tmin = max(0, j2 - j3 - m1, j1 - j3 + m2)
    tmax = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    s = Fraction(0)
    for t in range(tmin, tmax + 1):
        denom = (f(t) * f(j3 - j2 + t + m1) * f(j3 - j1 + t - m2)
                 * f(j1 + j2 - j3 - t) * f(j1 - t - m1) * f(j2 - t + m2))
        s += Fraction(-1 if t % 2 else 1, denom)
    if s == 0:
        return 0, Fraction(0)
    triangle = Fraction(f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3), f(j1 + j2 + j3 + 1))
    square = triangle * f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3) * s * s
    sign = (1 if s > 0 else -1) * (-1 if (j1 - j2 - m3) % 2 else 1)
    return sign, square


@dataclass(frozen=True)
class Wigner3jArg:
    j1: int
    j2: int
    j3: int
    m1: int
    m2: int
    m3: int

    def __post_init__(self):
        if min(self.j1, self.j2, self.j3) < 0:
            raise ValueError("3j angular momenta must be non-negative")
        if abs(self.m1) > self.j1 or abs(self.m2) > self.j2 or abs(self.m3) > self.j3:
            raise ValueError(f"|m_i| <= j_i violated in {self}")

    def astuple(self) -> tuple[int, int, int, int, int, int]:
        return (self.j1, self.j2, self.j3, self.m1, self.m2, self.m3)


def wigner3j(*args) -> float:
    """Wigner 3j symbol, from a :class:`Wigner3jArg` or six integers j1 j2 j3 m1 m2 m3.

    Returns 0 when a selection rule fails.
    """
    if len(args) == 1 and isinstance(args[0], Wigner3jArg):
        args = args[0].astuple()
    sign, square = wigner3j_exact(*(int(a) for a in args))
    if sign == 0:
        return 0.0
    return sign * math.sqrt(square)


def wigner3j_table(jmax: int) -> list[tuple[int, int, int, int, int, int, float]]:
    """All nonzero 3j symbols with j1, j2, j3 <= jmax."""
    rows = []
    for j1 in range(jmax + 1):
        for j2 in range(jmax + 1):
            for j3 in range(abs(j1 - j2), min(j1 + j2, jmax) + 1):
                for m1 in range(-j1, j1 + 1):
                    for m2 in range(-j2, j2 + 1):
                        m3 = -m1 - m2
                        if abs(m3) > j3:
                            continue
                        v = wigner3j(j1, j2, j3, m1, m2, m3)
                        if v != 0.0:
                            rows.append((j1, j2, j3, m1, m2, m3, v))
    return rows


# -- spherical harmonics ----------------------------------------------------------

@lru_cache(maxsize=None)
def _rodrigues(l: int, m: int) -> tuple[float, np.ndarray, np.ndarray]:
    """Normalization constant, d^{l+m}(1-z^2)^l and its z-derivative (ascending coefficients)."""
    base = np.array([1.0])
    for _ in range(l):
        base = npoly.polymul(base, [1.0, 0.0, -1.0])
    p = npoly.polyder(base, l + m) if l + m > 0 else base
    norm = ((-1) ** l / (2 ** l * math.factorial(l))
            * math.sqrt((2 * l + 1) * math.factorial(l - m) / (FOUR_PI * math.factorial(l + m))))
    return norm, p, npoly.polyder(p)


def _check_z(z):
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) >= 1.0):
        raise DomainError("spherical harmonics are evaluated on -1 < z < 1 (poles excluded)")
    return z


def ylm(*args) -> np.ndarray | complex:
    """Y_{lm}(z, phi): call as ``ylm(idx, z, phi)`` or ``ylm(l, m, z, phi)``."""
    if isinstance(args[0], SphericalIndex):
        (idx, z, phi) = args
        l, m = idx.l, idx.m
    else:
        l, m, z, phi = args
        SphericalIndex(l, m)
    z = _check_z(z)
    norm, p, _ = _rodrigues(l, m)
    w = 1.0 - z * z
    out = norm * np.exp(1j * m * np.asarray(phi, dtype=float)) * w ** (m / 2.0) * npoly.polyval(z, p)
    return out if np.ndim(out) else complex(out)


def ylm_dz(l: int, m: int, z, phi):
    """dY_{lm}/dz, analytically."""
    z = _check_z(z)
    norm, p, dp = _rodrigues(l, m)
    w = 1.0 - z * z
    ph = np.exp(1j * m * np.asarray(phi, dtype=float))
    return norm * ph * (w ** (m / 2.0) * npoly.polyval(z, dp) - m * z * w ** (m / 2.0 - 1.0) * npoly.polyval(z, p))


def laplace_beltrami_fd(func, z, phi, h: float = 1e-4):
    """Finite-difference Delta = -[d_z((1-z^2) d_z) + d_phi^2 / (1-z^2)] of ``func(z, phi)``."""
    def flux(zz):
        d = (func(zz + h / 2, phi) - func(zz - h / 2, phi)) / h
        return (1 - zz * zz) * d

    dzz = (flux(z + h / 2) - flux(z - h / 2)) / h
    dpp = (func(z, phi + h) - 2 * func(z, phi) + func(z, phi - h)) / (h * h)
    return -(dzz + dpp / (1 - z * z))


def real_harmonic(idx: SphericalIndex) -> dict[tuple[int, int], complex]:
    """Complex-basis expansion of the real unit-norm harmonic labelled by ``idx``."""
    l, m = idx.l, idx.m
    if m == 0:
        return {(l, 0): 1.0 + 0j}
    a = abs(m)
    s = (-1) ** a
    r = 1.0 / math.sqrt(2.0)
    if m > 0:
        return {(l, a): r + 0j, (l, -a): s * r + 0j}
    return {(l, a): -1j * r, (l, -a): 1j * s * r}


def _as_expansion(f) -> dict[tuple[int, int], complex]:
    if isinstance(f, SphericalIndex):
        return real_harmonic(f)
    return dict(f)


def evaluate(f, z, phi):
    f = _as_expansion(f)
    z, phi = np.asarray(z, dtype=float), np.asarray(phi, dtype=float)
    out = np.zeros(np.broadcast(z, phi).shape, dtype=complex)
    for (l, m), c in f.items():
        out = out + c * ylm(l, m, z, phi)
    return out


def _value_and_derivs(f, z, phi):
    val = np.zeros(np.broadcast(z, phi).shape, dtype=complex)
    dz = np.zeros_like(val)
    dphi = np.zeros_like(val)
    for (l, m), c in f.items():
        y = ylm(l, m, z, phi)
        val = val + c * y
        dz = dz + c * ylm_dz(l, m, z, phi)
        dphi = dphi + c * 1j * m * y
    return val, dz, dphi


# -- quadrature ---------------------------------------------------------------------

@dataclass(frozen=True)
class SphereQuadrature:
    """Gauss-Legendre in z times the uniform trapezoid rule in phi."""

    n_z: int
    n_phi: int
    z: np.ndarray = field(repr=False, compare=False, default=None)
    phi: np.ndarray = field(repr=False, compare=False, default=None)
    weights: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        zn, zw = np.polynomial.legendre.leggauss(self.n_z)
        ph = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        Z, PH = np.meshgrid(zn, ph, indexing="ij")
        object.__setattr__(self, "z", Z)
        object.__setattr__(self, "phi", PH)
        object.__setattr__(self, "weights", np.outer(zw, np.full(self.n_phi, 2.0 * np.pi / self.n_phi)))

    @classmethod
    def for_degree(cls, degree: int) -> "SphereQuadrature":
        """Exact for products of two harmonics of degree <= ``degree``."""
        return cls(2 * degree + 2, 4 * degree + 2)

    def integrate(self, values) -> complex:
        return complex(np.sum(self.weights * values))

    def inner(self, f_values, g_values) -> complex:
        """<f, g> = integral of f * conj(g)."""
        return self.integrate(f_values * np.conj(g_values))

    def project(self, values, lmax: int) -> dict[tuple[int, int], complex]:
        """Coefficients of ``values`` on every Y_{ij} with i <= lmax."""
        return {(i, j): self.inner(values, ylm(i, j, self.z, self.phi))
                for i in range(lmax + 1) for j in range(-i, i + 1)}


def bracket_sphere(f, h, quad: SphereQuadrature) -> np.ndarray:
    """Pointwise {F, H} on the quadrature nodes, from analytic derivatives."""
    f, h = _as_expansion(f), _as_expansion(h)
    _, fz, fp = _value_and_derivs(f, quad.z, quad.phi)
    _, hz, hp = _value_and_derivs(h, quad.z, quad.phi)
    return hz * fp - hp * fz


def gram_matrix(lmax: int, quad: SphereQuadrature | None = None) -> np.ndarray:
    quad = quad or SphereQuadrature.for_degree(lmax)
    idx = [(l, m) for l in range(lmax + 1) for m in range(-l, l + 1)]
    Y = np.array([ylm(l, m, quad.z, quad.phi) for l, m in idx])
    Yw = Y * quad.weights
    return np.einsum("aij,bij->ab", Yw, np.conj(Y))


# -- structure constants ----------------------------------------------------------------

def _falling_ratio(n: int, m: int, p: int) -> float:
    """sqrt( (n-|m|)...(n-|m|-2p) / ((n+|m|)...(n+|m|-2p)) ), 2p+1 factors each."""
    num = den = 1
    for t in range(2 * p + 1):
        num *= n - abs(m) - t
        den *= n + abs(m) - t
    return math.sqrt(num / den) if num > 0 else 0.0


def structure_constant_as(n: int, m: int, k: int, l: int, i: int, j: int) -> complex:
    """Arakelyan-Savvidy double-sum expression for C^{ij}_{nm,kl}.

    The square root carries (2i+1), the degree of the output harmonic. The sums run
    over every p (q) for which the lowered degree n-2p-1 (k-2q-1) can still carry
    order m (l). The expression expands dY/dz through derivatives of the Legendre
    polynomial factor only, which is exact for the bracket when m*l >= 0; use
    :func:`structure_constant` for arbitrary orders.
    """
    if j != m + l or abs(j) > i:
        return 0j
    pre = -1j * (-1) ** j * math.sqrt((2 * n + 1) * (2 * k + 1) * (2 * i + 1) / FOUR_PI)
    s1 = 0.0
    p = 0
    while n - 2 * p - 1 >= abs(m):
        a = n - 2 * p - 1
        s1 += (2 * a + 1) * _falling_ratio(n, m, p) * wigner3j(a, k, i, m, l, -j) * wigner3j(a, k, i, 0, 0, 0)
        p += 1
    s2 = 0.0
    q = 0
    while k - 2 * q - 1 >= abs(l):
        b = k - 2 * q - 1
        s2 += (2 * b + 1) * _falling_ratio(k, l, q) * wigner3j(n, b, i, m, l, -j) * wigner3j(n, b, i, 0, 0, 0)
        q += 1
    return pre * (l * s1 - m * s2)


def structure_constant_coupled(n: int, m: int, k: int, l: int, i: int, j: int) -> complex:
    """Rotation-equivariant closed form of C^{ij}_{nm,kl}, valid for all orders.

    i (-1)^j sqrt((2n+1)(2k+1)(2i+1) n(n+1) k(k+1) / 4pi) (n k i; m l -j)(n k i; 1 -1 0)
    when n + k + i is odd, and 0 otherwise.
    """
    if j != m + l or abs(j) > i or (n + k + i) % 2 == 0:
        return 0j
    a = wigner3j(n, k, i, m, l, -j)
    if a == 0.0:
        return 0j
    b = wigner3j(n, k, i, 1, -1, 0)
    mag = math.sqrt((2 * n + 1) * (2 * k + 1) * (2 * i + 1) * n * (n + 1) * k * (k + 1) / FOUR_PI)
    return 1j * (-1) ** j * mag * a * b


def structure_constant(n: int, m: int, k: int, l: int, i: int, j: int) -> complex:
    if m * l >= 0:
        return structure_constant_as(n, m, k, l, i, j)
    return structure_constant_coupled(n, m, k, l, i, j)


@dataclass(frozen=True)
class StructureConstantTable:
    lmax: int
    entries: Mapping[tuple[int, int, int, int], Mapping[tuple[int, int], complex]]

    def get(self, n, m, k, l, i, j) -> complex:
        return self.entries.get((n, m, k, l), {}).get((i, j), 0j)

    def antisymmetry_defect(self) -> float:
        worst = 0.0
        keys = set(self.entries)
        for key in keys:
            n, m, k, l = key
            mirror = self.entries.get((k, l, n, m), {})
            for ij, c in self.entries[key].items():
                worst = max(worst, abs(c + mirror.get(ij, 0j)))
        return worst

    def bracket_expansion(self, f, h) -> dict[tuple[int, int], complex]:
        """Harmonic coefficients of {F, H} for F, H given as expansions or indices."""
        f, h = _as_expansion(f), _as_expansion(h)
        out: dict[tuple[int, int], complex] = {}
        for (n, m), a in f.items():
            for (k, l), b in h.items():
                if max(n, k) > self.lmax:
                    raise IncompleteBasisError(f"table lmax={self.lmax} does not cover degree {max(n, k)}")
                for ij, c in self.entries.get((n, m, k, l), {}).items():
                    out[ij] = out.get(ij, 0j) + a * b * c
        return out

    def rows(self) -> list[tuple[int, int, int, int, int, int, float, float]]:
        out = []
        for (n, m, k, l), row in sorted(self.entries.items()):
            for (i, j), c in sorted(row.items()):
                out.append((n, m, k, l, i, j, c.real + 0.0, c.imag + 0.0))
        return out


def structure_constants(lmax: int, validate: bool = True, tol: float = VALIDATION_TOL,
                        drop: float = 1e-14) -> StructureConstantTable:
    """Table of C^{ij}_{nm,kl} for 1 <= n, k <= lmax.

    With ``validate`` every (n, m, k, l) row is compared against a quadrature
    projection of the pointwise bracket, including components the closed form
    claims are zero; a disagreement beyond ``tol`` raises
    :class:`FormulaTranscriptionError`.
    """
    if lmax < 1:
        raise ValueError("lmax must be >= 1")
    entries: dict = {}
    quad = SphereQuadrature.for_degree(2 * lmax) if validate else None
    for n in range(1, lmax + 1):
        for m in range(-n, n + 1):
            for k in range(1, lmax + 1):
                for l in range(-k, k + 1):
                    j = m + l
                    row = {}
                    for i in range(max(abs(j), 1), n + k):
                        c = structure_constant(n, m, k, l, i, j)
                        if abs(c) > drop:
                            row[(i, j)] = c
                    if row:
                        entries[(n, m, k, l)] = row
                    if validate:
                        _validate_row(n, m, k, l, row, quad, tol)
    return StructureConstantTable(lmax, entries)


def _validate_row(n, m, k, l, row, quad, tol):
    values = bracket_sphere({(n, m): 1.0}, {(k, l): 1.0}, quad)
    projected = quad.project(values, n + k + 1)
    for ij, c in projected.items():
        expected = row.get(ij, 0j)
        if abs(c - expected) > tol:
            raise FormulaTranscriptionError(
                f"C^{ij}_({n},{m}),({k},{l}) = {expected:.10g} but quadrature gives {c:.10g}")


def projection_error(table: StructureConstantTable, nmax: int, quad: SphereQuadrature | None = None) -> float:
    """Max |C - quadrature projection| over all rows with n, k <= nmax."""
    quad = quad or SphereQuadrature.for_degree(2 * nmax)
    worst = 0.0
    for n in range(1, nmax + 1):
        for m in range(-n, n + 1):
            for k in range(1, nmax + 1):
                for l in range(-k, k + 1):
                    values = bracket_sphere({(n, m): 1.0}, {(k, l): 1.0}, quad)
                    for ij, c in quad.project(values, n + k + 1).items():
                        worst = max(worst, abs(c - table.get(n, m, k, l, *ij)))
    return worst


def pointwise_expansion_error(table: StructureConstantTable, nmax: int, quad: SphereQuadrature | None = None) -> float:
    """Max pointwise |{Y_nm, Y_kl} - sum C Y_ij| on quadrature nodes for n, k <= nmax."""
    quad = quad or SphereQuadrature.for_degree(2 * nmax)
    worst = 0.0
    for n in range(1, nmax + 1):
        for m in range(-n, n + 1):
            for k in range(1, nmax + 1):
                for l in range(-k, k + 1):
                    direct = bracket_sphere({(n, m): 1.0}, {(k, l): 1.0}, quad)
                    recon = evaluate(table.entries.get((n, m, k, l), {}), quad.z, quad.phi)
                    worst = max(worst, float(np.max(np.abs(direct - recon))))
    return worst


# -- curvature on the sphere ------------------------------------------------------------

def _sphere_pair(a: SphericalIndex, b: SphericalIndex):
    if a == b:
        raise DegeneratePlaneError(f"identical harmonics {a} span a single direction")
    if a.l == 0 or b.l == 0:
        raise DegeneratePlaneError("constant harmonics generate the zero vector field")
    return float(a.eigenvalue), float(b.eigenvalue)


def k_sphere(a: SphericalIndex, b: SphericalIndex, lmax: int,
             table: StructureConstantTable | None = None) -> CurvatureReport:
    """Right-invariant sectional curvature of the plane of two real harmonics.

    Uses the structure-constant form with bracket coefficients truncated at
    degree ``lmax``; the report's ``terms`` hold ``K@<cutoff>`` for every cutoff up
    to ``lmax`` as a convergence record. Raises :class:`IncompleteBasisError` when
    the truncated expansion misses part of the bracket.
    """
    alpha, beta = _sphere_pair(a, b)
    if table is None or table.lmax < max(a.l, b.l):
        table = structure_constants(max(a.l, b.l), validate=False)
    coeffs = table.bracket_expansion(a, b)
    quad = SphereQuadrature.for_degree(2 * (a.l + b.l))
    norm_sq = quad.inner(bracket_sphere(a, b, quad), bracket_sphere(a, b, quad)).real

    def expansion(cutoff):
        return [((i * (i + 1)), c) for (i, j), c in coeffs.items() if i <= cutoff]

    convergence = {}
    for cutoff in range(1, lmax + 1):
        convergence[f"K@{cutoff}"] = k_from_structure_constants(expansion(cutoff), alpha, beta).K
    report = k_from_structure_constants(expansion(lmax), alpha, beta, bracket_norm_sq=norm_sq)
    terms = dict(report.terms)
    terms.update(convergence)
    return CurvatureReport(report.K, Formula.RIGHT_SC_21, terms, (alpha, beta))


def k_sphere_quadrature(a: SphericalIndex, b: SphericalIndex, degree: int | None = None) -> float:
    """Eigenfunction curvature formula evaluated from the quadrature-projected bracket.

    Independent of the structure constants: the bracket is sampled pointwise and
    projected on harmonics numerically, then Delta and Delta^{-1} act diagonally.
    """
    alpha, beta = _sphere_pair(a, b)
    degree = degree or (a.l + b.l + 2)
    quad = SphereQuadrature.for_degree(2 * degree)
    values = bracket_sphere(a, b, quad)
    coeffs = quad.project(values, degree)
    energy = sum(i * (i + 1) * abs(c) ** 2 for (i, _), c in coeffs.items())
    sq = quad.inner(values, values).real
    inv = sum(abs(c) ** 2 / (i * (i + 1)) for (i, _), c in coeffs.items() if i > 0)
    K = -0.75 * energy + 0.5 * (alpha + beta) * sq + 0.25 * (alpha - beta) ** 2 * inv
    return K / (alpha * beta)
