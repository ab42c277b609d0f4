"""Sectional curvature of the Hamiltonian diffeomorphism group.

Two metrics are covered: the bi-invariant L^2 pairing of Hamiltonians and the
right-invariant kinetic-energy metric ``(X_F, X_H) = <Delta F, H>``. All general
formulas accept unnormalized Hamiltonians; the pair is orthonormalized in the
relevant metric first and the raw norms are kept in the report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    DegeneratePlaneError,
    IncompleteBasisError,
    NotEigenfunctionError,
    SingularDenominatorError,
)
from .trig import (
    COS,
    Phase,
    TrigPolynomial,
    canonical_mode,
    inverse_laplacian,
    l2_inner,
    laplacian,
    poisson_bracket,
    right_inner,
    torus_volume,
)

GRAM_TOL = 1e-12
EIGEN_TOL = 1e-12
COVERAGE_TOL = 1e-10


class Formula(str, Enum):
    BI_13 = "BI_13"
    RIGHT_19 = "RIGHT_19"
    RIGHT_EIGEN_20 = "RIGHT_EIGEN_20"
    RIGHT_SC_21 = "RIGHT_SC_21"
    TORUS_BI_23 = "TORUS_BI_23"
    TORUS_RIGHT_24 = "TORUS_RIGHT_24"


@dataclass(frozen=True)
class CurvatureReport:
    K: float
    formula: Formula
    terms: dict[str, float] = field(default_factory=dict)
    norms: tuple[float, float] = (float("nan"), float("nan"))


@dataclass(frozen=True)
class ModePair:
    """F = trig(n.x + m.y), H = trig(k.x + l.y) with the given phases."""

    n: tuple[int, ...]
    m: tuple[int, ...]
    k: tuple[int, ...]
    l: tuple[int, ...]
    phases: tuple[Phase, Phase] = (COS, COS)

    def __post_init__(self):
        vecs = []
        for name in ("n", "m", "k", "l"):
            v = getattr(self, name)
            v = (int(v),) if isinstance(v, (int, np.integer)) else tuple(int(a) for a in v)
            object.__setattr__(self, name, v)
            vecs.append(v)
        if len({len(v) for v in vecs}) != 1:
            raise ValueError("all wavevectors of a mode pair must have the same length q")
        object.__setattr__(self, "phases", (Phase(self.phases[0]), Phase(self.phases[1])))
        if self.alpha == 0 or self.beta == 0:
            raise ValueError(f"mode pair {self.label()} has a zero wavevector")

    @classmethod
    def parse(cls, text: str, q: int = 1, phases=(COS, COS)) -> "ModePair":
        """Parse ``"n,m,k,l"``; for q > 1 each entry is ``a;b;...``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected four comma-separated entries n,m,k,l, got {text!r}")
        vecs = [tuple(int(a) for a in p.split(";")) for p in parts]
        if any(len(v) != q for v in vecs):
            raise ValueError(f"each entry of {text!r} must have {q} component(s)")
        return cls(*vecs, phases=phases)

    @property
    def q(self) -> int:
        return len(self.n)

    @property
    def alpha(self) -> int:
        return sum(a * a for a in self.n + self.m)

    @property
    def beta(self) -> int:
        return sum(a * a for a in self.k + self.l)

    @property
    def bracket_factor(self) -> int:
        """m.k - n.l, the scalar in front of the bracket of the two modes."""
        return _dot(self.m, self.k) - _dot(self.n, self.l)

    @property
    def is_resonant(self) -> bool:
        return self.n + self.m == self.k + self.l or self.n + self.m == tuple(-a for a in self.k + self.l)

    @property
    def is_degenerate(self) -> bool:
        """True when F and H are proportional (same canonical mode and phase)."""
        a, _ = canonical_mode(self.n, self.m, self.phases[0])
        b, _ = canonical_mode(self.k, self.l, self.phases[1])
        return a == b

    def hamiltonians(self) -> tuple[TrigPolynomial, TrigPolynomial]:
        return (TrigPolynomial.mode(self.n, self.m, self.phases[0]),
                TrigPolynomial.mode(self.k, self.l, self.phases[1]))

    def label(self) -> str:
        def fmt(v):
            return ";".join(str(a) for a in v)
        return ",".join(fmt(v) for v in (self.n, self.m, self.k, self.l))


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _orthonormalize(f, h, inner):
    a = inner(f, f)
    b = inner(h, h)
    c = inner(f, h)
    gram = a * b - c * c
    if not (a > 0 and b > 0) or gram <= GRAM_TOL * a * b:
        raise DegeneratePlaneError(f"Hamiltonians do not span a 2-plane (Gram determinant {gram:.3g})")
    f_hat = f / math.sqrt(a)
    h_perp = h - (c / a) * f
    h_hat = h_perp / math.sqrt(inner(h_perp, h_perp))
    return f_hat, h_hat, (a, b), gram


# -- bi-invariant metric --------------------------------------------------------

def k_bi(f: TrigPolynomial, h: TrigPolynomial) -> CurvatureReport:
    """K = 1/4 int {F,H}^2 / (<F,F><H,H> - <F,H>^2)."""
    a, b = l2_inner(f, f), l2_inner(h, h)
    c = l2_inner(f, h)
    gram = a * b - c * c
    if not (a > 0 and b > 0) or gram <= GRAM_TOL * a * b:
        raise DegeneratePlaneError(f"Hamiltonians do not span a 2-plane (Gram determinant {gram:.3g})")
    br = poisson_bracket(f, h)
    sq = l2_inner(br, br)
    return CurvatureReport(0.25 * sq / gram, Formula.BI_13, {"bracket_sq": sq, "gram": gram}, (a, b))


def k_bi_tensor(f: TrigPolynomial, h: TrigPolynomial) -> float:
    """Same curvature through <R(X,Y)Y, X> with R(X,Y)Z = -1/4 [[X,Y],Z]."""
    f_hat, h_hat, _, _ = _orthonormalize(f, h, l2_inner)
    rxy_y = -0.25 * poisson_bracket(poisson_bracket(f_hat, h_hat), h_hat)
    return l2_inner(rxy_y, f_hat)


# -- covariant derivative of the right-invariant metric ---------------------------

def nabla_hamiltonian(f: TrigPolynomial, h: TrigPolynomial) -> TrigPolynomial:
    """Hamiltonian S of the projected covariant derivative P(nabla_{X_F} X_H).

    Delta S = 1/2 (Delta{F,H} + {F, Delta H} + {H, Delta F}).
    """
    lap_s = 0.5 * (laplacian(poisson_bracket(f, h))
                   + poisson_bracket(f, laplacian(h))
                   + poisson_bracket(h, laplacian(f)))
    return inverse_laplacian(lap_s)


def nabla_symmetric(f: TrigPolynomial, h: TrigPolynomial) -> TrigPolynomial:
    """Hamiltonian T of P(nabla_X Y + nabla_Y X); Delta T = {F, Delta H} + {H, Delta F}."""
    return inverse_laplacian(poisson_bracket(f, laplacian(h)) + poisson_bracket(h, laplacian(f)))


# -- right-invariant metric -------------------------------------------------------

def right_curvature_terms(f: TrigPolynomial, h: TrigPolynomial) -> dict[str, float]:
    """The four integrals of the general right-invariant formula, unnormalized."""
    lf, lh = laplacian(f), laplacian(h)
    p = poisson_bracket(f, h)
    cross = poisson_bracket(f, lh) + poisson_bracket(lf, h)
    sym = poisson_bracket(f, lh) + poisson_bracket(h, lf)
    return {
        "bracket_energy": -0.75 * l2_inner(laplacian(p), p),
        "bracket_cross": 0.5 * l2_inner(p, cross),
        "self_advection": -l2_inner(poisson_bracket(f, lf), inverse_laplacian(poisson_bracket(h, lh))),
        "symmetric_part": 0.25 * l2_inner(sym, inverse_laplacian(sym)),
    }


def k_right_general(f: TrigPolynomial, h: TrigPolynomial) -> CurvatureReport:
    f_hat, h_hat, norms, _ = _orthonormalize(f, h, right_inner)
    terms = right_curvature_terms(f_hat, h_hat)
    return CurvatureReport(sum(terms.values()), Formula.RIGHT_19, terms, norms)


def laplace_eigenvalue(f: TrigPolynomial, tol: float = EIGEN_TOL) -> float:
    """Return alpha with Delta f = alpha f, or raise NotEigenfunctionError."""
    if f.is_zero:
        raise NotEigenfunctionError("the zero function is not an eigenfunction")
    ref = next(iter(f.terms))
    alpha = float(ref.eigenvalue)
    resid = (laplacian(f) - alpha * f).max_abs_coeff()
    if resid > tol * max(1.0, alpha * f.max_abs_coeff()):
        raise NotEigenfunctionError(f"{f!r} is not a Laplace eigenfunction (residual {resid:.3g})")
    return alpha


def _eigen_pair(f, h):
    if isinstance(f, ModePair):
        f, h = f.hamiltonians()
    alpha, beta = laplace_eigenvalue(f), laplace_eigenvalue(h)
    # L^2-orthonormalizing keeps eigenfunctions: a projection is nonzero only inside one eigenspace
    f_hat, h_hat, _, _ = _orthonormalize(f, h, l2_inner)
    return f, h, f_hat, h_hat, alpha, beta


def k_right_eigen(f, h: TrigPolynomial | None = None) -> CurvatureReport:
    """Eigenfunction specialization; accepts a :class:`ModePair` or two eigenfunctions."""
    f, h, f_hat, h_hat, alpha, beta = _eigen_pair(f, h)
    p = poisson_bracket(f_hat, h_hat)
    terms = {
        "bracket_energy": -0.75 * l2_inner(laplacian(p), p),
        "bracket_sq": 0.5 * (alpha + beta) * l2_inner(p, p),
        "inverse_term": 0.25 * (alpha - beta) ** 2 * l2_inner(p, inverse_laplacian(p)),
    }
    K = sum(terms.values()) / (alpha * beta)
    return CurvatureReport(K, Formula.RIGHT_EIGEN_20, terms, (right_inner(f, f), right_inner(h, h)))


def k_from_structure_constants(expansion: Iterable[tuple[float, float]], alpha: float, beta: float,
                               bracket_norm_sq: float | None = None, tol: float = COVERAGE_TOL) -> CurvatureReport:
    """Curvature from the bracket's coefficients in an orthonormal eigenbasis.

    ``expansion`` yields ``(lambda_i, C_i)``: eigenvalue and coefficient (real, or
    complex with ``|C_i|^2`` summed) of each basis function in {F, H}, for unit
    L^2-norm eigenfunctions F, H with eigenvalues ``alpha``, ``beta``. When
    ``bracket_norm_sq`` is given, the expansion must account for all of it.
    """
    s_lam = s_one = s_inv = 0.0
    for lam, c in expansion:
        c2 = abs(c) ** 2
        if c2 == 0.0:
            continue
        if lam <= 0:
            raise ValueError("bracket coefficient on a zero eigenvalue: the bracket must be zero-mean")
        s_lam += lam * c2
        s_one += c2
        s_inv += c2 / lam
    if bracket_norm_sq is not None:
        resid = bracket_norm_sq - s_one
        if abs(resid) > tol * max(1.0, bracket_norm_sq):
            raise IncompleteBasisError(f"eigenbasis misses part of the bracket (residual {resid:.3g})")
    terms = {
        "bracket_energy": -0.75 * s_lam,
        "bracket_sq": 0.5 * (alpha + beta) * s_one,
        "inverse_term": 0.25 * (alpha - beta) ** 2 * s_inv,
    }
    return CurvatureReport(sum(terms.values()) / (alpha * beta), Formula.RIGHT_SC_21, terms, (alpha, beta))


def torus_bracket_expansion(f, h: TrigPolynomial | None = None):
    """Orthonormal-eigenbasis coefficients of {F,H} for unit-norm torus eigenfunctions.

    Returns ``(expansion, alpha, beta, bracket_norm_sq)`` ready for
    :func:`k_from_structure_constants`. The basis function for a mode is
    ``trig(.) / sqrt((2 pi)^{2q} / 2)``.
    """
    _, _, f_hat, h_hat, alpha, beta = _eigen_pair(f, h)
    p = poisson_bracket(f_hat, h_hat)
    scale = math.sqrt(0.5 * torus_volume(p.q))
    expansion = [(float(mode.eigenvalue), c * scale) for mode, c in p.terms.items()]
    return expansion, alpha, beta, l2_inner(p, p)


def k_torus_structure_constants(f, h: TrigPolynomial | None = None) -> CurvatureReport:
    expansion, alpha, beta, norm_sq = torus_bracket_expansion(f, h)
    return k_from_structure_constants(expansion, alpha, beta, norm_sq)


# -- torus closed forms -----------------------------------------------------------

def k_torus_bi(pair: ModePair) -> float:
    """(mk - nl)^2 / (4 (2pi)^{2q})."""
    if pair.is_degenerate:
        raise DegeneratePlaneError(f"mode pair {pair.label()} spans a single direction")
    return pair.bracket_factor ** 2 / (4.0 * torus_volume(pair.q))


def torus_right_denominators(pair: ModePair) -> tuple[int, int]:
    a = sum((x - y) ** 2 for x, y in zip(pair.n + pair.m, pair.k + pair.l))
    b = sum((x + y) ** 2 for x, y in zip(pair.n + pair.m, pair.k + pair.l))
    return a, b


def k_torus_right(pair: ModePair) -> float:
    """Closed-form right-invariant curvature of a mode pair.

    For q = 1 this is -(mk-nl)^4 (alpha+beta) / ((2pi)^2 alpha beta a b) with
    a = |n-k|^2+|m-l|^2 and b = |n+k|^2+|m+l|^2. For q > 1 one factor (mk-nl)^2
    is replaced by the Gram determinant alpha*beta - (n.k + m.l)^2, which equals
    (mk-nl)^2 only in two dimensions (Lagrange's identity).
    """
    a, b = torus_right_denominators(pair)
    if a == 0 or b == 0:
        raise SingularDenominatorError(
            f"resonant mode pair {pair.label()}: (n,m) = +-(k,l) makes the closed form 0/0")
    p = pair.bracket_factor
    alpha, beta = pair.alpha, pair.beta
    gram = alpha * beta - (_dot(pair.n, pair.k) + _dot(pair.m, pair.l)) ** 2
    return -(p * p) * gram * (alpha + beta) / (torus_volume(pair.q) * alpha * beta * a * b)


def torus_terms(pair: ModePair) -> dict[str, float]:
    a, b = torus_right_denominators(pair)
    return {"bracket_factor": float(pair.bracket_factor), "alpha": float(pair.alpha),
            "beta": float(pair.beta), "diff_sq": float(a), "sum_sq": float(b)}


# -- enumeration helpers ------------------------------------------------------------

def canonical_wavevectors(max_wavenumber: int, q: int = 1) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All nonzero (n, m) with entries in [-W, W] whose first nonzero entry is positive."""
    rng = range(-max_wavenumber, max_wavenumber + 1)
    out = []
    for v in np.ndindex(*([len(rng)] * (2 * q))):
        vec = tuple(int(i) - max_wavenumber for i in v)
        nz = [a for a in vec if a]
        if nz and nz[0] > 0:
            out.append((vec[:q], vec[q:]))
    return out


def enumerate_mode_pairs(max_wavenumber: int, q: int = 1, include_degenerate: bool = False,
                         include_resonant: bool = True) -> Iterator[ModePair]:
    """Every ordered pair of distinct cosine modes with wavenumbers bounded by W."""
    vecs = canonical_wavevectors(max_wavenumber, q)
    for n, m in vecs:
        for k, l in vecs:
            pair = ModePair(n, m, k, l)
            if not include_degenerate and pair.is_degenerate:
                continue
            if not include_resonant and pair.is_resonant:
                continue
            yield pair


def random_mode_pair(rng: np.random.Generator, max_wavenumber: int = 5, q: int = 1,
                     allow_resonant: bool = False, random_phases: bool = False) -> ModePair:
    while True:
        vals = rng.integers(-max_wavenumber, max_wavenumber + 1, size=4 * q)
        n, m, k, l = (tuple(int(a) for a in vals[i * q:(i + 1) * q]) for i in range(4))
        if not any(n + m) or not any(k + l):
            continue
        phases = (COS, COS)
        if random_phases:
            phases = tuple(Phase(p) for p in rng.choice(["cos", "sin"], size=2))
        pair = ModePair(n, m, k, l, phases)
        if pair.is_degenerate or (pair.is_resonant and not allow_resonant):
            continue
        return pair


def random_eigenfunction(rng: np.random.Generator, eigenvalue_max_wavenumber: int = 4,
                         n_terms: int = 3) -> TrigPolynomial:
    """Random combination of q=1 modes sharing one Laplace eigenvalue."""
    W = eigenvalue_max_wavenumber
    by_eig: dict[int, list] = {}
    for n, m in canonical_wavevectors(W):
        by_eig.setdefault(n[0] ** 2 + m[0] ** 2, []).append((n, m))
    lam = int(rng.choice(sorted(by_eig)))
    vecs = by_eig[lam]
    f = TrigPolynomial.zero()
    for _ in range(n_terms):
        n, m = vecs[int(rng.integers(len(vecs)))]
        phase = "cos" if rng.random() < 0.5 else "sin"
        f = f + TrigPolynomial.mode(n, m, phase, float(rng.uniform(-1, 1)))
    if f.is_zero:
        return random_eigenfunction(rng, W, n_terms)
    return f


def relative_error(a: float, b: float, floor: float = 1e-14) -> float:
    return abs(a - b) / max(floor, abs(b))
