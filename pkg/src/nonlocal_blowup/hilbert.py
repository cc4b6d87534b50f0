"""Hilbert transforms on periodic and line grids, and weighted bilinear forms.

Both discretizations target the same continuum operator

    (Hf)(x) = (1/pi) P.V. int f(y) / (x - y) dy,

whose periodic form has Fourier symbol ``-i sgn(k)``.  On line grids the
principal value is computed with the alternating trapezoidal rule

    (Hf)_i = (1/pi) sum_{j - i odd} f_j / (x_i - x_j) * 2h,

which is a discrete convolution with kernel ``2 / (pi m)`` for odd ``m``; it
is evaluated with a zero-padded FFT in O(n log n).
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import Field, Grid

# rows per block in the O(n^2) double sums
_BLOCK = 512


@lru_cache(maxsize=32)
def hilbert_symbol(grid: Grid) -> np.ndarray:
    """``-i sgn(k)`` on the rfft modes; zero at k = 0 and at Nyquist."""
    sym = np.full(grid.n // 2 + 1, -1j)
    sym[0] = 0.0
    if grid.n % 2 == 0:
        sym[-1] = 0.0
    sym.setflags(write=False)
    return sym


@lru_cache(maxsize=32)
def _alternating_kernel_fft(n: int) -> np.ndarray:
    m = np.arange(1, n, 2)
    kernel = np.zeros(2 * n)
    kernel[m] = 2.0 / (np.pi * m)
    kernel[2 * n - m] = -2.0 / (np.pi * m)
    spec = np.fft.rfft(kernel)
    spec.setflags(write=False)
    return spec


def hilbert_periodic_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    return np.fft.irfft(np.fft.rfft(values) * hilbert_symbol(grid), grid.n)


def hilbert_alternating_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    n = grid.n
    conv = np.fft.irfft(np.fft.rfft(values, 2 * n) * _alternating_kernel_fft(n), 2 * n)
    return conv[:n]


def hilbert_alternating_direct(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Reference O(n^2) evaluation of the alternating trapezoidal sum."""
    x = grid.points
    f = np.asarray(values, dtype=np.float64)
    out = np.empty(grid.n)
    idx = np.arange(grid.n)
    for start in range(0, grid.n, _BLOCK):
        rows = idx[start:start + _BLOCK]
        diff = rows[:, None] - idx[None, :]
        odd = (diff % 2) != 0
        dx = x[rows, None] - x[None, :]
        kern = np.where(odd, 2.0 * grid.h / np.where(odd, dx, 1.0), 0.0)
        out[start:start + _BLOCK] = kern @ f
    return out / np.pi


def hilbert_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    if grid.is_periodic:
        return hilbert_periodic_values(grid, values)
    return hilbert_alternating_values(grid, values)


def hilbert_periodic(f: Field) -> Field:
    if not f.grid.is_periodic:
        raise ValueError("spectral Hilbert transform needs a periodic grid")
    return Field(f.grid, hilbert_periodic_values(f.grid, f.values))


def hilbert_alternating_trapezoidal(f: Field) -> Field:
    if f.grid.is_periodic:
        raise ValueError("the alternating trapezoidal rule is for line grids")
    return Field(f.grid, hilbert_alternating_values(f.grid, f.values))


def hilbert(f: Field) -> Field:
    """Hilbert transform with the operator matching the grid kind."""
    return Field(f.grid, hilbert_values(f.grid, f.values))


@dataclass(frozen=True)
class TestWeight:
    """Lipschitz weight phi for the bilinear identities.

    Build with :meth:`shifted_linear` (``x - a``), :meth:`reflected_linear`
    (``b - x``), :meth:`periodic_lipschitz` or :meth:`lipschitz`.
    """

    __test__ = False  # keep pytest from collecting this class

    kind: str
    func: Callable[[np.ndarray], np.ndarray]
    slope: Callable[[np.ndarray], np.ndarray]
    lipschitz_constant: float
    period: float | None = None
    description: str = ""

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=np.float64))

    @classmethod
    def shifted_linear(cls, a: float) -> TestWeight:
        return cls("shifted_linear", lambda x: x - a, lambda x: np.ones_like(x), 1.0,
                   description=f"phi(x) = x - {a}")

    @classmethod
    def reflected_linear(cls, b: float) -> TestWeight:
        return cls("reflected_linear", lambda x: b - x, lambda x: -np.ones_like(x), 1.0,
                   description=f"phi(x) = {b} - x")

    @classmethod
    def lipschitz(cls, func, lipschitz_constant: float, derivative=None,
                  description: str = "") -> TestWeight:
        return cls("lipschitz", func, derivative or _centered_slope(func),
                   float(lipschitz_constant), None, description)

    @classmethod
    def periodic_lipschitz(cls, func, lipschitz_constant: float, period: float,
                           derivative=None, description: str = "") -> TestWeight:
        return cls("periodic_lipschitz", func, derivative or _centered_slope(func),
                   float(lipschitz_constant), float(period), description)

    def sample(self, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
        x = grid.points
        phi = np.broadcast_to(self.func(x), x.shape).astype(np.float64)
        if self.period is not None:
            shifted = np.broadcast_to(self.func(x + self.period), x.shape)
            scale = max(1.0, float(np.abs(phi).max()))
            if np.abs(shifted - phi).max() > 1e-12 * scale:
                raise ValueError(f"weight {self.description!r} is not "
                                 f"{self.period}-periodic")
        slope = np.broadcast_to(self.slope(x), x.shape).astype(np.float64)
        return phi, slope


def _centered_slope(func, step: float = 1e-5):
    def slope(x):
        return (func(x + step) - func(x - step)) / (2.0 * step)
    return slope


def weighted_bilinear_lhs(f: Field, phi: TestWeight) -> float:
    """``int phi f Hf dx`` with the grid's Hilbert operator and quadrature."""
    grid = f.grid
    weight, _ = phi.sample(grid)
    hf = hilbert_values(grid, f.values)
    return grid.integrate(weight * f.values * hf)


def weighted_bilinear_rhs(f: Field, phi: TestWeight) -> float:
    """Direct double-sum quadrature of the symmetrized bilinear form.

    Line:     (1/2pi) sum_ij w_i w_j f_i f_j (phi_i - phi_j) / (x_i - x_j)
    Periodic: (1/2P)  sum_ij w_i w_j f_i f_j (phi_i - phi_j) cot(pi (x_i - x_j) / P)

    The diagonal takes the limit ``phi'(x_i) / (2 pi)`` in both cases.  Cost
    is O(n^2); this is a cross-check, not a production path.
    """
    grid = f.grid
    x = grid.points
    weight, slope = phi.sample(grid)
    g = grid.quadrature_weights * f.values
    total = 0.0
    for start in range(0, grid.n, _BLOCK):
        stop = min(start + _BLOCK, grid.n)
        dx = x[start:stop, None] - x[None, :]
        dphi = weight[start:stop, None] - weight[None, :]
        diag = np.zeros_like(dx, dtype=bool)
        rows = np.arange(start, stop)
        diag[rows - start, rows] = True
        if grid.is_periodic:
            period = grid.extent
            safe = np.where(diag, 0.25 * period, dx)
            kern = dphi / np.tan(np.pi * safe / period) / (2.0 * period)
        else:
            kern = dphi / np.where(diag, 1.0, dx) / (2.0 * np.pi)
        kern[diag] = slope[start:stop] / (2.0 * np.pi)
        total += float(g[start:stop] @ (kern @ g))
    return total


def shifted_linear_closed_form(f: Field) -> float:
    """``(1/2pi) (int f)^2``, the value of the form for phi = x - a."""
    return f.grid.integrate(f.values) ** 2 / (2.0 * math.pi)
