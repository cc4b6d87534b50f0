"""Discrete domains, grid functions, derivatives and norms.

Two domain kinds are supported:

* ``periodic`` -- a uniform grid on ``[x_lo, x_lo + period)`` with a power-of-two
  point count, differentiated spectrally;
* ``line`` -- a uniform grid on a truncated interval ``[x_lo, x_hi)`` that
  contains a marked support interval ``[a, b]`` for compactly supported data.
  Derivatives use fourth-order centered differences.

All arrays are float64.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

PERIODIC = "periodic"
LINE = "line"

# relative threshold below which a compactly supported field counts as zero
SUPPORT_TOL = 1e-13


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    kind: str
    n: int
    x_lo: float
    x_hi: float
    support: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in (PERIODIC, LINE):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.n < 8:
            raise ValueError(f"grid needs at least 8 points, got {self.n}")
        if self.kind == PERIODIC and not _is_power_of_two(self.n):
            raise ValueError(f"periodic grids need a power-of-two n, got {self.n}")
        if not self.x_hi > self.x_lo:
            raise ValueError("empty domain")
        if self.support is not None:
            a, b = self.support
            if not a < b:
                raise ValueError(f"empty support {self.support}")
            if self.kind == LINE and not (self.x_lo < a and b < self.x_hi):
                raise ValueError(f"support {self.support} not strictly inside "
                                 f"({self.x_lo}, {self.x_hi})")
            if self.kind == PERIODIC and not (self.x_lo <= a and b <= self.x_hi):
                raise ValueError(f"support {self.support} outside the period")
        elif self.kind == LINE:
            raise ValueError("line grids need a support interval")

    @property
    def is_periodic(self) -> bool:
        return self.kind == PERIODIC

    @property
    def extent(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def h(self) -> float:
        return self.extent / self.n

    @cached_property
    def points(self) -> np.ndarray:
        x = self.x_lo + self.h * np.arange(self.n)
        x.setflags(write=False)
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers of the rfft modes (periodic grids)."""
        k = 2.0 * np.pi / self.extent * np.arange(self.n // 2 + 1)
        k.setflags(write=False)
        return k

    @cached_property
    def quadrature_weights(self) -> np.ndarray:
        """Rectangle weights on periodic grids, trapezoidal on line grids."""
        w = np.full(self.n, self.h)
        if self.kind == LINE:
            w[0] = w[-1] = 0.5 * self.h
        w.setflags(write=False)
        return w

    @cached_property
    def support_mask(self) -> np.ndarray:
        if self.support is None:
            m = np.ones(self.n, dtype=bool)
        else:
            a, b = self.support
            m = (self.points >= a) & (self.points <= b)
        m.setflags(write=False)
        return m

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.quadrature_weights, values))

    def to_spec(self) -> dict[str, Any]:
        if self.kind == PERIODIC:
            spec = {"kind": PERIODIC, "n": self.n, "x_lo": self.x_lo,
                    "period": self.extent}
        else:
            spec = {"kind": LINE, "n": self.n, "domain": [self.x_lo, self.x_hi]}
        if self.support is not None:
            spec["support"] = list(self.support)
        return spec


def periodic_grid(n: int, period: float = 1.0, x_lo: float = 0.0,
                  support: tuple[float, float] | None = None) -> Grid:
    return Grid(PERIODIC, int(n), float(x_lo), float(x_lo + period),
                None if support is None else (float(support[0]), float(support[1])))


def line_grid(n: int, support: tuple[float, float],
              domain: tuple[float, float] = (0.0, 1.0)) -> Grid:
    return Grid(LINE, int(n), float(domain[0]), float(domain[1]),
                (float(support[0]), float(support[1])))


def make_grid(spec: Mapping[str, Any] | Grid) -> Grid:
    """Build a grid from a mapping such as ``{"kind": "periodic", "n": 1024}``.

    Periodic specs accept ``period`` (default 1) and ``x_lo``; line specs
    need ``support`` and accept ``domain`` (default ``[0, 1]``).
    """
    if isinstance(spec, Grid):
        return spec
    kind = spec.get("kind", PERIODIC)
    n = spec["n"]
    support = spec.get("support")
    if kind == PERIODIC:
        return periodic_grid(n, spec.get("period", 1.0), spec.get("x_lo", 0.0),
                             support)
    if kind == LINE:
        if support is None:
            raise ValueError("line grids need a support interval")
        return line_grid(n, tuple(support), tuple(spec.get("domain", (0.0, 1.0))))
    raise ValueError(f"unknown grid kind {kind!r}")


class Field:
    """A real grid function with a lazily computed rfft companion.

    Values are stored read-only, so the cached spectrum cannot go stale.
    ``compact=True`` marks data supported in ``grid.support``.
    """

    def __init__(self, grid: Grid, values, compact: bool = False):
        values = np.array(values, dtype=np.float64)
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} values, got shape {values.shape}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.compact = bool(compact)
        if self.compact:
            if grid.support is None:
                raise ValueError("compact fields need a grid with a support interval")
            outside = np.abs(values[~grid.support_mask])
            scale = np.abs(values).max(initial=0.0)
            if outside.size and outside.max() > SUPPORT_TOL * scale:
                raise ValueError("field tagged compact is nonzero outside its support")

    @cached_property
    def spectral(self) -> np.ndarray:
        return np.fft.rfft(self.values)

    def with_values(self, values) -> Field:
        return Field(self.grid, values, self.compact)

    def __repr__(self):
        return (f"Field({self.grid.kind}, n={self.grid.n}, "
                f"max={np.abs(self.values).max():.6g}, compact={self.compact})")


@dataclass
class SolutionState:
    u: Field
    v: Field
    t: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ValueError("u and v live on different grids")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def from_arrays(cls, grid: Grid, u, v, t: float = 0.0, compact: bool = False,
                    meta: dict | None = None) -> SolutionState:
        return cls(Field(grid, u, compact), Field(grid, v), float(t), dict(meta or {}))


def spectral_derivative_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    coeffs = np.fft.rfft(values) * (1j * grid.wavenumbers)
    if grid.n % 2 == 0:
        coeffs[-1] = 0.0
    return np.fft.irfft(coeffs, grid.n)


def fd4_derivative_values(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite differences; one-sided fourth-order stencils at the ends."""
    f = values
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12.0 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12.0 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12.0 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12.0 * h)
    return d


def derivative_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    if grid.is_periodic:
        return spectral_derivative_values(grid, values)
    return fd4_derivative_values(values, grid.h)


def spectral_derivative(f: Field) -> Field:
    """d/dx by multiplication with ik; the Nyquist mode is dropped."""
    if not f.grid.is_periodic:
        raise ValueError("spectral differentiation needs a periodic grid; "
                         "use derivative() on line grids")
    return Field(f.grid, spectral_derivative_values(f.grid, f.values))


def derivative(f: Field) -> Field:
    return Field(f.grid, derivative_values(f.grid, f.values))


@dataclass(frozen=True)
class NormRecord:
    t: float
    dt: float
    sup_u: float
    sup_v: float
    l2_u: float
    l2_v: float
    h1_u: float
    h1_v: float
    bkm_integrand: float
    bkm_integral: float


def l2_norm(grid: Grid, values: np.ndarray) -> float:
    # scaled by the sup so that huge but finite data does not overflow
    scale = float(np.max(np.abs(values)))
    if scale == 0.0 or not math.isfinite(scale):
        return scale
    return scale * math.sqrt(max(grid.integrate((values / scale) ** 2), 0.0))


def _sobolev_pair(grid: Grid, values: np.ndarray) -> tuple[float, float]:
    l2 = l2_norm(grid, values)
    return l2, math.hypot(l2, l2_norm(grid, derivative_values(grid, values)))


def norm_record(grid: Grid, u: np.ndarray, v: np.ndarray, t: float,
                previous: NormRecord | None = None, dt: float | None = None,
                bkm_integral: float | None = None) -> NormRecord:
    """Array-level version of :func:`norms`.

    The running BKM integral is advanced from ``previous`` by the trapezoidal
    rule unless ``bkm_integral`` is supplied directly.
    """
    sup_u = float(np.max(np.abs(u)))
    sup_v = float(np.max(np.abs(v)))
    l2_u, h1_u = _sobolev_pair(grid, u)
    l2_v, h1_v = _sobolev_pair(grid, v)
    integrand = sup_u + sup_v
    if dt is None:
        dt = 0.0 if previous is None else t - previous.t
    if bkm_integral is None:
        bkm_integral = 0.0
        if previous is not None:
            bkm_integral = previous.bkm_integral + 0.5 * (t - previous.t) * (
                previous.bkm_integrand + integrand)
    return NormRecord(float(t), float(dt), sup_u, sup_v, l2_u, l2_v, h1_u, h1_v,
                      integrand, float(bkm_integral))


def norms(state: SolutionState, previous: NormRecord | None = None) -> NormRecord:
    """Sup, L2 and H1 norms of (u, v) plus the running BKM integral.

    Pass the record of the preceding state as ``previous`` to accumulate
    ``int_0^t (|u|_inf + |v|_inf) dt``; without it the integral starts at 0.
    """
    return norm_record(state.grid, state.u.values, state.v.values, state.t,
                       previous=previous)
