"""Euler equation d/dt (Delta F) = {Delta F, F} on T^2, integrated in vorticity form.

The evolved state is the vorticity ``w = Delta F``; the stream function is recovered
as ``F = Delta^{-1} w``. Time stepping is classical fixed-step RK4 with 2/3-rule
dealiasing of the quadratic term.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceError
from .spectral import (
    GridSpec,
    SpectralField,
    _bracket_half,
    _derivatives,
    from_half,
    from_trig,
    to_half,
    integrate,
    inverse_laplacian_sf,
    laplacian_sf,
    riemann_sum,
    to_grid,
    bracket_ps,
)
from .trig import TrigPolynomial


class CFLWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    steps: int
    grid: GridSpec = field(default_factory=lambda: GridSpec(128))
    invariant_stride: int = 1
    casimir_orders: tuple[int, ...] = (2, 3, 4)
    snapshot_stride: int | None = None

    def __post_init__(self):
        if not self.dt >= 0 or not math.isfinite(self.dt):
            raise ValueError(f"dt must be a finite non-negative number, got {self.dt}")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.invariant_stride < 1:
            raise ValueError("invariant_stride must be positive")
        orders = tuple(int(k) for k in self.casimir_orders)
        if any(k < 2 for k in orders):
            raise ValueError("Casimir orders must be >= 2")
        object.__setattr__(self, "casimir_orders", orders)


@dataclass(frozen=True)
class TrajectoryRecord:
    step: int
    t: float
    L: float
    I: dict[int, float]
    max_vorticity: float

    def row(self, orders: Sequence[int]) -> list[float]:
        return [self.t, self.L, *(self.I[k] for k in orders), self.max_vorticity]


def rhs(w: SpectralField) -> SpectralField:
    """Right-hand side {w, Delta^{-1} w} of the vorticity equation."""
    return bracket_ps(w, inverse_laplacian_sf(w))


def _rhs_array(w: np.ndarray, grid: GridSpec) -> np.ndarray:
    # w is a half-spectrum array (see spectral.to_half)
    return _bracket_half(w, w * grid.inv_k2_half, grid)


def _rk4(w: np.ndarray, dt: float, grid: GridSpec) -> np.ndarray:
    k1 = _rhs_array(w, grid)
    k2 = _rhs_array(w + 0.5 * dt * k1, grid)
    k3 = _rhs_array(w + 0.5 * dt * k2, grid)
    k4 = _rhs_array(w + dt * k3, grid)
    return w + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def max_velocity(w: SpectralField) -> float:
    fx, fy = _derivatives(inverse_laplacian_sf(w).coeffs, w.grid)
    return float(np.sqrt(np.max(fx * fx + fy * fy)))


def cfl_number(w: SpectralField, dt: float) -> float:
    return dt * max_velocity(w) * w.grid.N / (2.0 * np.pi)


def _check_cfl(w: SpectralField, dt: float):
    c = cfl_number(w, dt)
    if c >= 0.5:
        warnings.warn(f"CFL number {c:.3g} >= 0.5 (dt={dt}, N={w.grid.N})", CFLWarning, stacklevel=3)


def step(w: SpectralField, dt: float, step_index: int | None = None) -> SpectralField:
    """One RK4 step of size ``dt``."""
    _check_cfl(w, dt)
    if dt == 0:
        return w
    out = _rk4(to_half(w.coeffs, w.grid), dt, w.grid)
    if not np.all(np.isfinite(out)):
        raise DivergenceError(step_index if step_index is not None else 1)
    return from_half(out, w.grid)


def initial_vorticity(F0: TrigPolynomial, grid: GridSpec) -> SpectralField:
    """Laplacian of ``F0`` placed coefficient-wise on the grid (no sampling noise)."""
    if F0.q != 1:
        raise ValueError("the solver runs on T^2 only (q=1)")
    if F0.has_constant:
        raise ValueError("initial Hamiltonian must be zero-mean")
    kmax = F0.max_wavenumber
    if kmax > grid.N / 3.0 or (kmax > grid.N // 2 - 1):
        raise ValueError(f"initial data has wavenumber {kmax} outside the dealiased band of N={grid.N}")
    return laplacian_sf(from_trig(F0, grid))


def energy(w: SpectralField) -> float:
    """L = 1/2 integral of F Delta F."""
    return 0.5 * integrate(inverse_laplacian_sf(w), w)


def casimir(w: SpectralField, k: int, grid_values: np.ndarray | None = None) -> float:
    """I_k = integral of w^k; Parseval for k = 2, grid quadrature otherwise."""
    if k == 2:
        return integrate(w, w)
    if grid_values is None:
        grid_values = to_grid(w)
    return riemann_sum(grid_values ** k)


def diagnostics(w: SpectralField, t: float, step_index: int, orders: Sequence[int]) -> TrajectoryRecord:
    values = to_grid(w)
    return TrajectoryRecord(
        step=step_index,
        t=t,
        L=energy(w),
        I={k: casimir(w, k, values) for k in orders},
        max_vorticity=float(np.max(np.abs(values))),
    )


def evolve(w: SpectralField, dt: float, steps: int) -> SpectralField:
    """Advance ``steps`` RK4 steps without recording diagnostics."""
    _check_cfl(w, dt)
    c = to_half(w.coeffs, w.grid)
    for i in range(steps):
        c = _rk4(c, dt, w.grid)
        if not np.all(np.isfinite(c)):
            raise DivergenceError(i + 1)
    return from_half(c, w.grid)


def simulate(
    F0: TrigPolynomial,
    cfg: SolverConfig,
    sink: Callable[[TrajectoryRecord], None] | None = None,
    on_snapshot: Callable[[int, float, SpectralField], None] | None = None,
) -> list[TrajectoryRecord]:
    """Integrate from Hamiltonian ``F0`` and return the recorded trajectory.

    Records are taken at step 0, every ``cfg.invariant_stride`` steps, and at the
    final step. Each record is also passed to ``sink`` as soon as it is produced.
    On divergence the raised :class:`DivergenceError` carries the partial
    trajectory in its ``trajectory`` attribute.
    """
    grid = cfg.grid
    w = initial_vorticity(F0, grid)
    _check_cfl(w, cfg.dt)
    records: list[TrajectoryRecord] = []

    def emit(rec):
        records.append(rec)
        if sink is not None:
            sink(rec)

    emit(diagnostics(w, 0.0, 0, cfg.casimir_orders))
    if on_snapshot is not None and cfg.snapshot_stride:
        on_snapshot(0, 0.0, w)
    c = to_half(w.coeffs, grid)
    # blow-up is reported through DivergenceError, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, cfg.steps + 1):
            c = _rk4(c, cfg.dt, grid)
            if not np.all(np.isfinite(c)):
                raise DivergenceError(i, f"non-finite vorticity at step {i} (t={i * cfg.dt:g})", records)
            record_now = i % cfg.invariant_stride == 0 or i == cfg.steps
            snap_now = on_snapshot is not None and cfg.snapshot_stride and i % cfg.snapshot_stride == 0
            if record_now or snap_now:
                w = from_half(c, grid)
                c = to_half(w.coeffs, grid)
                if record_now:
                    emit(diagnostics(w, i * cfg.dt, i, cfg.casimir_orders))
                if snap_now:
                    on_snapshot(i, i * cfg.dt, w)
    return records


def relative_drift(records: Sequence[TrajectoryRecord], quantity: str | int) -> float:
    """max_t |Q(t) - Q(0)| / |Q(0)| for ``"L"`` or a Casimir order."""
    values = np.array([r.L if quantity == "L" else r.I[int(quantity)] for r in records])
    ref = values[0]
    if ref == 0:
        return float(np.max(np.abs(values - ref)))
    return float(np.max(np.abs(values - ref)) / abs(ref))


def rk4_order_ratio(F0: TrigPolynomial, grid: GridSpec, t_final: float, dt: float, refine: int = 16) -> float:
    """Error ratio e(dt)/e(dt/2) at fixed ``t_final`` against a fine reference run.

    The reference uses step ``dt / refine``; for a 4th-order method the ratio
    tends to 16.
    """
    w0 = initial_vorticity(F0, grid)

    def run(h):
        n = int(round(t_final / h))
        return evolve(w0, t_final / n, n).coeffs

    ref = run(dt / refine)
    e1 = np.max(np.abs(run(dt) - ref))
    e2 = np.max(np.abs(run(dt / 2) - ref))
    return float(e1 / e2)


# -- CSV / snapshot output ----------------------------------------------------

def trajectory_header(orders: Sequence[int]) -> list[str]:
    return ["t", "L", *(f"I{k}" for k in orders), "max_vorticity"]


def write_trajectory_csv(records: Sequence[TrajectoryRecord], orders: Sequence[int], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(trajectory_header(orders))
        for rec in records:
            writer.writerow([repr(float(v)) for v in rec.row(orders)])


def read_trajectory_csv(path) -> list[dict[str, float]]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def snapshot_record(step_index: int, t: float, w: SpectralField, tol: float = 1e-15) -> dict:
    """Plain-text dump of the nonzero half-plane vorticity coefficients."""
    N = w.grid.N
    k = w.grid.wavenumbers.astype(int)
    coeffs = []
    for i in range(N):
        for j in range(N):
            n, m = int(k[i]), int(k[j])
            if n < 0 or (n == 0 and m <= 0):
                continue
            c = w.coeffs[i, j]
            if abs(c) > tol:
                coeffs.append([n, m, repr(float(c.real)), repr(float(c.imag))])
    return {"step": step_index, "t": t, "N": N, "dealias": w.grid.dealias.value, "vorticity": coeffs}


def write_snapshot(path, step_index: int, t: float, w: SpectralField) -> None:
    Path(path).write_text(json.dumps(snapshot_record(step_index, t, w)) + "\n")
