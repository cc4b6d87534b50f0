"""Singularity fits, self-similar profiles and blow-up monitors.

The singularity form ``|u|_inf = C / (T - t)^alpha`` is fitted with
``alpha = 1`` by linear least squares on ``1 / |u|_inf``.  Profiles are
rescaled as ``U(xi) = (T - t) u(x0 + xi L)`` with the length scale
``L = (T - t)^(1/2) ln(1/(T - t))^(1/2)``.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import least_squares, minimize_scalar

from .dynamics import ModelSpec
from .grid import Grid, SolutionState, derivative_values


@dataclass(frozen=True)
class FitWindow:
    """Which samples of a norm history enter the singularity fit.

    The lower bound on ``|u|_inf`` is ``sup_min`` if given, else
    ``final / 10**decades`` if ``decades`` is given, else ``growth_factor``
    times the initial value.  The window is the contiguous tail of the
    history above that bound, minus the last ``exclude_last`` samples.
    """

    sup_min: float | None = None
    sup_max: float | None = None
    decades: float | None = None
    growth_factor: float = 100.0
    exclude_last: int = 5

    def to_dict(self) -> dict:
        return {"sup_min": self.sup_min, "sup_max": self.sup_max,
                "decades": self.decades, "growth_factor": self.growth_factor,
                "exclude_last": self.exclude_last}


@dataclass(frozen=True)
class BlowupFit:
    T: float
    C: float
    alpha_exp: float
    window: tuple[float, float]
    residual: float
    n_samples: int
    alpha_free: float | None = None
    T_free: float | None = None
    C_free: float | None = None

    def to_dict(self) -> dict:
        return {"T": self.T, "C": self.C, "alpha_exp": self.alpha_exp,
                "window": list(self.window), "residual": self.residual,
                "n_samples": self.n_samples, "alpha_free": self.alpha_free,
                "T_free": self.T_free, "C_free": self.C_free}

    @classmethod
    def from_dict(cls, d: dict) -> BlowupFit:
        return cls(T=d["T"], C=d["C"], alpha_exp=d["alpha_exp"],
                   window=tuple(d["window"]), residual=d["residual"],
                   n_samples=d["n_samples"], alpha_free=d.get("alpha_free"),
                   T_free=d.get("T_free"), C_free=d.get("C_free"))


def _history_arrays(history) -> tuple[np.ndarray, np.ndarray]:
    records = getattr(history, "norm_history", history)
    t = np.array([r.t for r in records], dtype=np.float64)
    sup = np.array([r.sup_u for r in records], dtype=np.float64)
    return t, sup


def window_indices(sup: np.ndarray, window: FitWindow) -> np.ndarray:
    end = len(sup) - window.exclude_last
    if end <= 0:
        return np.arange(0)
    upper = window.sup_max if window.sup_max is not None else math.inf
    candidates = np.nonzero(sup[:end] <= upper)[0]
    if candidates.size == 0:
        return candidates
    end = candidates[-1] + 1
    if window.sup_min is not None:
        lower = window.sup_min
    elif window.decades is not None:
        lower = sup[end - 1] / 10.0 ** window.decades
    else:
        lower = window.growth_factor * sup[0]
    below = np.nonzero(sup[:end] < lower)[0]
    start = below[-1] + 1 if below.size else 0
    return np.arange(start, end)


def _linear_fit(t: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    tm = t.mean()
    A = np.column_stack([t - tm, np.ones_like(t)])
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(slope), float(icpt), float(tm)


def _free_exponent_fit(t, sup, T0, C0):
    t_end = t[-1]
    scale = T0 - t_end
    logs = np.log(sup)

    def resid(p):
        T = t_end + scale * math.exp(p[0])
        return p[1] - p[2] * np.log(T - t) - logs

    sol = least_squares(resid, x0=[0.0, math.log(C0), 1.0], method="lm",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    T = t_end + scale * math.exp(sol.x[0])
    return float(sol.x[2]), float(T), float(math.exp(sol.x[1]))


def fit_blowup(history, window: FitWindow | None = None,
               free_exponent: bool = True) -> BlowupFit:
    """Least-squares fit of ``1/|u|_inf = (T - t) / C`` over a window.

    ``history`` is a sequence of :class:`NormRecord` or a run result.  With
    ``free_exponent`` the three-parameter form ``C / (T - t)^alpha`` is also
    fitted (in log form) as a diagnostic.
    """
    window = window or FitWindow()
    t_all, sup_all = _history_arrays(history)
    idx = window_indices(sup_all, window)
    if idx.size < 10:
        raise ValueError(f"fit window holds {idx.size} samples; need at least 10")
    t, sup = t_all[idx], sup_all[idx]
    if np.any(sup <= 0):
        raise ValueError("fit window contains zero sup norms")
    y = 1.0 / sup
    slope, icpt, tm = _linear_fit(t, y)
    if not slope < 0:
        raise ValueError("1/|u|_inf is not decreasing over the fit window")
    T = tm - icpt / slope
    C = -1.0 / slope
    if not T > t[-1]:
        raise ValueError(f"fitted T = {T} does not lie beyond the fit window")
    y_fit = slope * (t - tm) + icpt
    residual = float(np.max(np.abs(y_fit - y) / y))
    alpha_free = T_free = C_free = None
    if free_exponent:
        alpha_free, T_free, C_free = _free_exponent_fit(t, sup, T, C)
    return BlowupFit(float(T), float(C), 1.0, (float(t[0]), float(t[-1])), residual,
                     int(idx.size), alpha_free, T_free, C_free)


# --- interpolation helpers ---------------------------------------------------

class _FourierInterpolant:
    """Trigonometric interpolant of periodic grid data, evaluated directly."""

    _CHUNK = 64

    def __init__(self, grid: Grid, values: np.ndarray):
        self.grid = grid
        n = grid.n
        c = np.fft.rfft(values) / n
        c[1:] *= 2.0
        if n % 2 == 0:
            c[-1] *= 0.5
        self.coeffs = c
        self.k = grid.wavenumbers

    def __call__(self, x, order: int = 0) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64)) - self.grid.x_lo
        c = self.coeffs * (1j * self.k) ** order
        out = np.empty(x.shape)
        for s in range(0, x.size, self._CHUNK):
            phase = np.exp(1j * np.outer(x[s:s + self._CHUNK], self.k))
            out[s:s + self._CHUNK] = (phase @ c).real
        return out


class _SplineInterpolant:
    def __init__(self, grid: Grid, values: np.ndarray):
        self.grid = grid
        self.spline = CubicSpline(grid.points, values)
        self.hi = grid.points[-1]

    def __call__(self, x, order: int = 0) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = self.spline(x, order)
        out[(x < self.grid.x_lo) | (x > self.hi)] = np.nan
        return out


def _interpolant(grid: Grid, values: np.ndarray):
    if grid.is_periodic:
        return _FourierInterpolant(grid, values)
    return _SplineInterpolant(grid, values)


def locate_peak(grid: Grid, values: np.ndarray, refine: bool = True) -> float:
    """Position of the global max of ``|values|`` with subgrid accuracy.

    A parabola through the three grid points around the discrete argmax
    gives the first estimate; ``refine`` then polishes it with Newton steps
    on the interpolant's derivative.
    """
    a = np.abs(values)
    j = int(np.argmax(a))
    n = grid.n
    if not grid.is_periodic and (j == 0 or j == n - 1):
        raise ValueError("maximum sits on the domain boundary")
    fm, f0, fp = a[(j - 1) % n], a[j], a[(j + 1) % n]
    denom = fm - 2.0 * f0 + fp
    offset = 0.5 * (fm - fp) / denom if denom != 0 else 0.0
    x0 = grid.x_lo + (j + offset) * grid.h
    if not refine:
        return x0
    interp = _interpolant(grid, values)
    sign = 1.0 if values[j] >= 0 else -1.0
    lo, hi = x0 - grid.h, x0 + grid.h
    for _ in range(20):
        d1 = interp(x0, 1)[0]
        d2 = interp(x0, 2)[0]
        if not (np.isfinite(d1) and np.isfinite(d2)) or sign * d2 >= 0:
            break
        step = d1 / d2
        x_new = min(max(x0 - step, lo), hi)
        if abs(x_new - x0) < 1e-15 * max(1.0, abs(x0)):
            x0 = x_new
            break
        x0 = x_new
    if grid.is_periodic:
        x0 = grid.x_lo + (x0 - grid.x_lo) % grid.extent
    return float(x0)


def similarity_length(tau: float) -> float:
    """``(T - t)^(1/2) ln(1/(T - t))^(1/2)`` for ``tau = T - t`` in (0, 1)."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"need 0 < T - t < 1, got {tau}")
    return math.sqrt(tau * math.log(1.0 / tau))


@dataclass
class SelfSimilarFrame:
    t: float
    T: float
    x0: float
    xi: np.ndarray
    U: np.ndarray
    V: np.ndarray
    length_scale: float
    lambda_est: float | None = None

    @property
    def tau(self) -> float:
        return self.T - self.t

    @property
    def U0(self) -> float:
        return float(self.U[len(self.xi) // 2])


def peak_velocity(state: SolutionState, model: ModelSpec, x0: float) -> float:
    """Instantaneous ``dx0/dt`` from ``u_x(x0(t), t) = 0``.

    Differentiating that constraint in time gives ``dx0/dt = -u_xt / u_xx``
    with ``u_xt = alpha u v_x + nu u_xxx`` at the peak.
    """
    grid = state.grid
    u, v = state.u.values, state.v.values
    iu = _interpolant(grid, u)
    vx = _interpolant(grid, derivative_values(grid, v))(x0)[0]
    u0, uxx = iu(x0)[0], iu(x0, 2)[0]
    uxt = model.alpha * u0 * vx
    if model.nu > 0:
        uxt += model.nu * iu(x0, 3)[0]
    return float(-uxt / uxx)


def extract_profile(state: SolutionState, fit: BlowupFit, xi_max: float | None = None,
                    n_xi: int = 801, model: ModelSpec | None = None) -> SelfSimilarFrame:
    """Rescale a snapshot into self-similar variables.

    ``xi`` is a uniform grid on ``[-xi_max, xi_max]`` with ``xi = 0`` at the
    peak (``n_xi`` is forced odd).  Periodic data are resampled with the
    trigonometric interpolant, line data with a cubic spline; line samples
    outside the domain are NaN.  When ``model`` is given the frame also carries
    ``lambda_est = (T - t)^(1/2) dx0/dt`` from :func:`peak_velocity`.
    """
    tau = fit.T - state.t
    if not tau > 0:
        raise ValueError(f"snapshot time {state.t} is not before T = {fit.T}")
    grid = state.grid
    L = similarity_length(tau)
    x0 = locate_peak(grid, state.u.values)
    if xi_max is None:
        half = np.count_nonzero(np.abs(state.u.values) >= 0.5 * np.abs(state.u.values).max())
        xi_max = 10.0 * max(half, 2) * grid.h / L
    n_xi = n_xi + 1 - n_xi % 2
    xi = np.linspace(-xi_max, xi_max, n_xi)
    xs = x0 + xi * L
    U = tau * _interpolant(grid, state.u.values)(xs)
    V = tau * _interpolant(grid, state.v.values)(xs)
    lam = None
    if model is not None:
        lam = math.sqrt(tau) * peak_velocity(state, model, x0)
    return SelfSimilarFrame(float(state.t), float(fit.T), x0, xi, U, V, L, lam)


@dataclass(frozen=True)
class LambdaEstimate:
    value: float
    spread: float
    samples: tuple[float, ...]

    def __float__(self):
        return self.value


def estimate_lambda(frames: Sequence[SelfSimilarFrame], n_last: int = 3,
                    period: float | None = None) -> LambdaEstimate:
    """``lim (T - t)^(1/2) dx0/dt`` from peak positions of successive frames.

    Each consecutive pair gives a difference quotient of ``x0``; it is paired
    with the midpoint taken in ``(T - t)^(1/2)``, the variable in which ``x0``
    is expected to be linear.  The estimate averages the last ``n_last``
    samples; ``spread`` is their max - min.  Pass ``period`` to unwrap
    positions on periodic domains.
    """
    if len(frames) < 3:
        raise ValueError("need at least 3 frames")
    frames = sorted(frames, key=lambda f: f.t)
    samples = []
    for f1, f2 in zip(frames[:-1], frames[1:]):
        dx = f2.x0 - f1.x0
        if period is not None:
            dx = (dx + 0.5 * period) % period - 0.5 * period
        rate = dx / (f2.t - f1.t)
        s_mid = 0.5 * (math.sqrt(f1.T - f1.t) + math.sqrt(f2.T - f2.t))
        samples.append(s_mid * rate)
    tail = np.array(samples[-n_last:])
    return LambdaEstimate(float(tail.mean()), float(tail.max() - tail.min()),
                          tuple(float(s) for s in samples))


def _finite_profile(frame: SelfSimilarFrame):
    ok = np.isfinite(frame.U)
    return frame.xi[ok], frame.U[ok]


def profile_mismatch(reference: SelfSimilarFrame, other: SelfSimilarFrame,
                     scale: float = 1.0, xi_window: float | None = None) -> float:
    """Relative sup-norm gap between ``U_ref(xi)`` and ``U_other(scale * xi)``.

    Taken over the reference points where both are defined (optionally only
    ``|xi| <= xi_window``) and divided by ``max |U_ref|`` there.
    """
    xr, ur = _finite_profile(reference)
    xo, uo = _finite_profile(other)
    spline = CubicSpline(xo, uo)
    keep = (scale * xr >= xo[0]) & (scale * xr <= xo[-1])
    if xi_window is not None:
        keep &= np.abs(xr) <= xi_window
    if np.count_nonzero(keep) < 3:
        raise ValueError("frames do not overlap in xi")
    ref = ur[keep]
    return float(np.max(np.abs(spline(scale * xr[keep]) - ref)) / np.max(np.abs(ref)))


def collapse_profiles(reference: SelfSimilarFrame, other: SelfSimilarFrame,
                      bounds: tuple[float, float] = (0.02, 50.0),
                      xi_window: float | None = None) -> tuple[float, float]:
    """Scale ``s`` minimizing the sup-norm gap of ``U_other(s xi)`` vs ``U_ref(xi)``.

    A log-spaced scan over ``bounds`` brackets the optimum, which bounded
    Brent iteration then refines.  Returns ``(s, mismatch)``.
    """
    def objective(log_s):
        try:
            return profile_mismatch(reference, other, math.exp(log_s), xi_window)
        except ValueError:
            return math.inf

    grid = np.linspace(math.log(bounds[0]), math.log(bounds[1]), 481)
    values = np.array([objective(g) for g in grid])
    if not np.isfinite(values).any():
        raise ValueError("frames do not overlap in xi")
    i = int(np.argmin(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    best = (res.x, res.fun) if res.fun <= values[i] else (grid[i], values[i])
    return float(math.exp(best[0])), float(best[1])


@dataclass
class BKMReport:
    times: np.ndarray
    integrand: np.ndarray
    integral: np.ndarray
    growth_rate: float
    classification: str
    T_fit: float | None = None
    tail_residual: float | None = None

    @property
    def total(self) -> float:
        return float(self.integral[-1])


BOUNDED = "bounded-so-far"
SUPERLINEAR = "superlinear-growth"


def bkm_monitor(history, window: FitWindow | None = None,
                max_residual: float = 0.05) -> BKMReport:
    """Track ``int_0^t (|u|_inf + |v|_inf) dt`` and classify its growth.

    The tail of the integrand is fitted to ``c / (T - t)`` (linear fit of its
    inverse).  A decreasing inverse with relative residual below
    ``max_residual`` and at least one decade of growth over the window means
    the integral diverges at ``T``; anything else is ``bounded-so-far``.
    """
    records = list(getattr(history, "norm_history", history))
    if not records:
        raise ValueError("empty history")
    t = np.array([r.t for r in records])
    g = np.array([r.bkm_integrand for r in records])
    total = np.array([r.bkm_integral for r in records])
    rate = float(g[-1])
    window = window or FitWindow(decades=1.0)
    report = BKMReport(t, g, total, rate, BOUNDED)
    if g[-1] <= 0:
        return report
    idx = window_indices(g, window)
    if idx.size < 10 or g[idx[-1]] < 10.0 * g[idx[0]] * 0.99:
        return report
    y = 1.0 / g[idx]
    slope, icpt, tm = _linear_fit(t[idx], y)
    if not slope < 0:
        return report
    resid = float(np.max(np.abs(slope * (t[idx] - tm) + icpt - y) / y))
    report.tail_residual = resid
    if resid < max_residual:
        report.classification = SUPERLINEAR
        report.T_fit = float(tm - icpt / slope)
    return report


def fit_width_exponent(states: Sequence[SolutionState], fit: BlowupFit) -> float:
    """Log-log slope of the peak half-width against ``T - t``.

    Diagnostic for the similarity exponent: 1/2 up to the logarithmic
    correction.  Widths are measured at half maximum on the interpolant.
    """
    taus, widths = [], []
    for s in states:
        grid = s.grid
        x0 = locate_peak(grid, s.u.values)
        interp = _interpolant(grid, np.abs(s.u.values))
        peak = interp(x0)[0]
        offsets = np.linspace(-200, 200, 8001) * grid.h
        vals = interp(x0 + offsets)
        above = offsets[np.nan_to_num(vals, nan=0.0) >= 0.5 * peak]
        widths.append(above.max() - above.min())
        taus.append(fit.T - s.t)
    slope = np.polyfit(np.log(taus), np.log(widths), 1)[0]
    return float(slope)
