"""Exact algebra of trigonometric Hamiltonians on the torus T^{2q} = R^{2q}/2piZ^{2q}.

A Hamiltonian is a finite sum of modes ``cos(n.x + m.y)`` / ``sin(n.x + m.y)`` with
integer q-vectors ``n`` and ``m``. Coefficients are floats; every operation keeps
the term map canonical (see :func:`canonical_mode`) so two polynomials describing
the same function have identical keys.

Bracket sign convention
-----------------------
The Poisson bracket used throughout is

    {F, H} = sum_i  dF/dy_i * dH/dx_i - dF/dx_i * dH/dy_i

which is the *negative* of the textbook ``F_x H_y - F_y H_x``. With it,

    {cos(nx+my), cos(kx+ly)} = 1/2 (mk - nl) (cos((n-k)x+(m-l)y) - cos((n+k)x+(m+l)y)).

Curvatures are quadratic in brackets, so none of the curvature values depend on
this choice; the sign only shows up in the bracket itself and in the direction of
the Euler flow.
"""
from __future__ import annotations

import json
import math
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatchError, DomainError

PRUNE_TOL = 1e-15


class Phase(str, Enum):
    COS = "cos"
    SIN = "sin"


COS = Phase.COS
SIN = Phase.SIN


class TrigMode(NamedTuple):
    n: tuple[int, ...]
    m: tuple[int, ...]
    phase: Phase

    @property
    def q(self) -> int:
        return len(self.n)

    @property
    def eigenvalue(self) -> int:
        """|n|^2 + |m|^2, the Laplace eigenvalue of the mode."""
        return sum(a * a for a in self.n) + sum(b * b for b in self.m)

    @property
    def is_constant(self) -> bool:
        return not any(self.n) and not any(self.m)

    def __str__(self):
        arg = _format_argument(self.n, self.m)
        return f"{self.phase.value}({arg})"


def _as_vector(v) -> tuple[int, ...]:
    if isinstance(v, (int, np.integer)):
        return (int(v),)
    return tuple(int(a) for a in v)


def canonical_mode(n, m, phase) -> tuple[TrigMode, int]:
    """Return ``(mode, sign)`` with the first nonzero entry of (n, m) positive.

    ``sign`` is -1 when a sine mode had to be reflected, since
    sin(-A) = -sin(A); cosine modes never change sign.
    """
    n, m = _as_vector(n), _as_vector(m)
    if len(n) != len(m):
        raise DimensionMismatchError(f"n and m have different lengths: {n}, {m}")
    phase = Phase(phase)
    for a in n + m:
        if a != 0:
            if a < 0:
                n = tuple(-x for x in n)
                m = tuple(-x for x in m)
                return TrigMode(n, m, phase), (-1 if phase is SIN else 1)
            break
    return TrigMode(n, m, phase), 1


class TrigPolynomial:
    """Immutable finite linear combination of torus Fourier modes."""

    __slots__ = ("_terms", "_q")

    def __init__(self, terms: Mapping[TrigMode, float] | Iterable[tuple[TrigMode, float]] = (), q: int | None = None):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[TrigMode, float] = {}
        for mode, c in items:
            mode, sign = canonical_mode(mode.n, mode.m, mode.phase)
            if q is None:
                q = mode.q
            elif mode.q != q:
                raise DimensionMismatchError(f"mode {mode} does not live on T^{2 * q}")
            if mode.is_constant and mode.phase is SIN:
                continue
            acc[mode] = acc.get(mode, 0.0) + sign * float(c)
        if q is None:
            q = 1
        if q < 1:
            raise ValueError("q must be a positive integer")
        self._q = q
        self._terms = MappingProxyType({k: v for k, v in acc.items() if abs(v) > PRUNE_TOL})

    # -- construction ---------------------------------------------------
    @classmethod
    def zero(cls, q: int = 1) -> "TrigPolynomial":
        return cls({}, q=q)

    @classmethod
    def mode(cls, n, m, phase=COS, coeff: float = 1.0) -> "TrigPolynomial":
        n, m = _as_vector(n), _as_vector(m)
        return cls([(TrigMode(n, m, Phase(phase)), coeff)], q=len(n))

    @classmethod
    def cos(cls, n, m, coeff: float = 1.0) -> "TrigPolynomial":
        return cls.mode(n, m, COS, coeff)

    @classmethod
    def sin(cls, n, m, coeff: float = 1.0) -> "TrigPolynomial":
        return cls.mode(n, m, SIN, coeff)

    # -- accessors ------------------------------------------------------
    @property
    def q(self) -> int:
        return self._q

    @property
    def terms(self) -> Mapping[TrigMode, float]:
        return self._terms

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def coeff(self, n, m, phase=COS) -> float:
        mode, sign = canonical_mode(n, m, phase)
        return sign * self._terms.get(mode, 0.0)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def has_constant(self) -> bool:
        return any(mode.is_constant for mode in self._terms)

    @property
    def max_wavenumber(self) -> int:
        return max((max(abs(a) for a in mode.n + mode.m) for mode in self._terms), default=0)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    # -- linear structure -----------------------------------------------
    def _check_q(self, other: "TrigPolynomial"):
        if self._q != other._q:
            raise DimensionMismatchError(f"q mismatch: {self._q} vs {other._q}")

    def __add__(self, other):
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        self._check_q(other)
        acc = dict(self._terms)
        for mode, c in other._terms.items():
            acc[mode] = acc.get(mode, 0.0) + c
        return TrigPolynomial(acc, q=self._q)

    def __neg__(self):
        return TrigPolynomial({k: -v for k, v in self._terms.items()}, q=self._q)

    def __sub__(self, other):
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, TrigPolynomial):
            return NotImplemented
        s = float(scalar)
        return TrigPolynomial({k: s * v for k, v in self._terms.items()}, q=self._q)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __eq__(self, other):
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        return self._q == other._q and dict(self._terms) == dict(other._terms)

    def __hash__(self):
        return hash((self._q, frozenset(self._terms.items())))

    def max_abs_diff(self, other: "TrigPolynomial") -> float:
        """Largest coefficient-wise difference."""
        return (self - other).max_abs_coeff()

    def allclose(self, other: "TrigPolynomial", tol: float = 1e-12) -> bool:
        return self.max_abs_diff(other) <= tol

    def __repr__(self):
        if not self._terms:
            return f"TrigPolynomial(0, q={self._q})"
        parts = [f"{c:+.6g}*{mode}" for mode, c in sorted(self._terms.items())]
        return f"TrigPolynomial({' '.join(parts)}, q={self._q})"

    # -- evaluation -----------------------------------------------------
    def _phases(self, xs: Sequence, ys: Sequence):
        for mode, c in self._terms.items():
            arg = sum(a * x for a, x in zip(mode.n, xs)) + sum(b * y for b, y in zip(mode.m, ys))
            yield mode, c, arg

    def evaluate(self, x, y):
        """Evaluate at points; ``x``/``y`` are arrays (q=1) or sequences of q arrays."""
        xs, ys = _coords(x, y, self._q)
        out = np.zeros(np.broadcast(*xs, *ys).shape)
        for mode, c, arg in self._phases(xs, ys):
            out = out + c * (np.cos(arg) if mode.phase is COS else np.sin(arg))
        return out

    def gradient(self, x, y):
        """Return (dF/dx_1..q, dF/dy_1..q) as two lists of arrays."""
        xs, ys = _coords(x, y, self._q)
        shape = np.broadcast(*xs, *ys).shape
        gx = [np.zeros(shape) for _ in range(self._q)]
        gy = [np.zeros(shape) for _ in range(self._q)]
        for mode, c, arg in self._phases(xs, ys):
            d = -c * np.sin(arg) if mode.phase is COS else c * np.cos(arg)
            for i in range(self._q):
                gx[i] = gx[i] + mode.n[i] * d
                gy[i] = gy[i] + mode.m[i] * d
        return gx, gy

    # -- serialization --------------------------------------------------
    def to_records(self) -> list[dict]:
        return [
            {"n": list(mode.n), "m": list(mode.m), "phase": mode.phase.value, "coeff": c}
            for mode, c in sorted(self._terms.items())
        ]

    @classmethod
    def from_records(cls, records: Iterable[Mapping], q: int | None = None) -> "TrigPolynomial":
        terms = []
        for rec in records:
            try:
                n, m = _as_vector(rec["n"]), _as_vector(rec["m"])
                phase = Phase(str(rec.get("phase", "cos")).lower())
                coeff = float(rec.get("coeff", 1.0))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"malformed term record {rec!r}: {exc}") from exc
            terms.append((TrigMode(n, m, phase), coeff))
        return cls(terms, q=q)

    def dumps(self) -> str:
        return json.dumps({"q": self._q, "terms": self.to_records()}, indent=2)

    @classmethod
    def loads(cls, text: str) -> "TrigPolynomial":
        data = json.loads(text)
        if isinstance(data, list):
            return cls.from_records(data)
        return cls.from_records(data["terms"], q=data.get("q"))

    def dump(self, path):
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def load(cls, path) -> "TrigPolynomial":
        return cls.loads(Path(path).read_text())


def _coords(x, y, q):
    if q == 1 and not isinstance(x, (list, tuple)):
        return [np.asarray(x, dtype=float)], [np.asarray(y, dtype=float)]
    xs, ys = [np.asarray(a, dtype=float) for a in x], [np.asarray(b, dtype=float) for b in y]
    if len(xs) != q or len(ys) != q:
        raise DimensionMismatchError(f"expected {q} coordinate arrays per axis")
    return xs, ys


def _format_argument(n, m):
    if len(n) == 1:
        parts = []
        for coef, var in ((n[0], "x"), (m[0], "y")):
            if coef:
                parts.append(f"{coef}{var}" if abs(coef) != 1 else ("-" if coef < 0 else "") + var)
        return "+".join(parts).replace("+-", "-") or "0"
    return f"n={list(n)},m={list(m)}"


def _check_same_q(*polys: TrigPolynomial):
    q = polys[0].q
    for p in polys[1:]:
        if p.q != q:
            raise DimensionMismatchError(f"q mismatch: {q} vs {p.q}")


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def poisson_bracket(f: TrigPolynomial, h: TrigPolynomial) -> TrigPolynomial:
    """Exact Poisson bracket ``{f, h}`` (sign convention in the module docstring)."""
    _check_same_q(f, h)
    acc: dict[TrigMode, float] = {}

    def add(n, m, phase, c):
        mode, sign = canonical_mode(n, m, phase)
        if mode.is_constant:
            # only reachable with a zero prefactor; sin(0) vanishes anyway
            if phase is SIN:
                return
        acc[mode] = acc.get(mode, 0.0) + sign * c

    for fm, fc in f.terms.items():
        for hm, hc in h.terms.items():
            s = _dot(fm.m, hm.n) - _dot(fm.n, hm.m)
            if s == 0:
                continue
            c = 0.5 * s * fc * hc
            dn = tuple(a - b for a, b in zip(fm.n, hm.n))
            dm = tuple(a - b for a, b in zip(fm.m, hm.m))
            sn = tuple(a + b for a, b in zip(fm.n, hm.n))
            sm = tuple(a + b for a, b in zip(fm.m, hm.m))
            # {F,H} = s * dF(A) * dH(B), with d(cos) = -sin and d(sin) = cos
            if fm.phase is COS and hm.phase is COS:
                add(dn, dm, COS, c)
                add(sn, sm, COS, -c)
            elif fm.phase is COS:
                add(sn, sm, SIN, -c)
                add(dn, dm, SIN, -c)
            elif hm.phase is COS:
                add(sn, sm, SIN, -c)
                add(dn, dm, SIN, c)
            else:
                add(dn, dm, COS, c)
                add(sn, sm, COS, c)
    return TrigPolynomial(acc, q=f.q)


def laplacian(f: TrigPolynomial) -> TrigPolynomial:
    """Delta = -div grad; multiplies each mode by |n|^2 + |m|^2."""
    return TrigPolynomial({mode: mode.eigenvalue * c for mode, c in f.terms.items()}, q=f.q)


def inverse_laplacian(f: TrigPolynomial) -> TrigPolynomial:
    if f.has_constant:
        raise DomainError("inverse Laplacian is only defined on zero-mean functions")
    return TrigPolynomial({mode: c / mode.eigenvalue for mode, c in f.terms.items()}, q=f.q)


def torus_volume(q: int) -> float:
    return (2.0 * math.pi) ** (2 * q)


def l2_inner(f: TrigPolynomial, h: TrigPolynomial) -> float:
    """Bi-invariant pairing: integral of F*H over the torus."""
    _check_same_q(f, h)
    if len(h) < len(f):
        f, h = h, f
    half_vol = 0.5 * torus_volume(f.q)
    total = 0.0
    for mode, c in f.terms.items():
        other = h.terms.get(mode)
        if other is not None:
            total += c * other * (2.0 * half_vol if mode.is_constant else half_vol)
    return total


def l2_norm_sq(f: TrigPolynomial) -> float:
    return l2_inner(f, f)


def right_inner(f: TrigPolynomial, h: TrigPolynomial) -> float:
    """Kinetic-energy pairing ``(X_F, X_H) = <Delta F, H>``."""
    return l2_inner(laplacian(f), h)


def ad_invariance_defect(f: TrigPolynomial, h: TrigPolynomial, g: TrigPolynomial) -> float:
    """``<{g,f}, h> + <f, {g,h}>``; zero for an ad-invariant pairing."""
    _check_same_q(f, h, g)
    return l2_inner(poisson_bracket(g, f), h) + l2_inner(f, poisson_bracket(g, h))


def random_trig_polynomial(rng: np.random.Generator, n_modes: int = 5, max_wavenumber: int = 3,
                           q: int = 1, phases: Sequence[Phase] = (COS, SIN)) -> TrigPolynomial:
    """Random zero-mean polynomial with up to ``n_modes`` modes, used by property checks."""
    terms = []
    while len(terms) < n_modes:
        n = tuple(int(a) for a in rng.integers(-max_wavenumber, max_wavenumber + 1, size=q))
        m = tuple(int(a) for a in rng.integers(-max_wavenumber, max_wavenumber + 1, size=q))
        if not any(n) and not any(m):
            continue
        phase = phases[int(rng.integers(len(phases)))]
        terms.append((TrigMode(n, m, Phase(phase)), float(rng.uniform(-1.0, 1.0))))
    return TrigPolynomial(terms, q=q)
