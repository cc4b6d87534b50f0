"""Time stepping: classical RK4, integrating-factor RK4 and the run loop."""
from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .dynamics import ModelSpec, Variant, rhs_values
from .grid import Grid, NormRecord, SolutionState, norm_record
from .hilbert import hilbert_symbol

log = logging.getLogger(__name__)


class NonFiniteState(ArithmeticError):
    """A step produced NaN or infinite values."""


class StopReason(str, Enum):
    MAX_TIME = "max_time"
    SUP_NORM_THRESHOLD = "sup_norm_threshold"
    DT_FLOOR = "dt_floor"
    NON_FINITE = "non_finite"


@dataclass(frozen=True)
class StepPolicy:
    """Adaptive step ``dt = min(c_dt / |u|_inf, dt_max)``.

    ``dt_max`` defaults to ``1e-3`` times the domain extent.  A run ends when
    the step would fall below ``dt_floor``.  ``fixed_dt`` disables adaptivity.
    """

    c_dt: float = 1e-3
    dt_max: float | None = None
    dt_floor: float = 1e-14
    recompute_every: int = 1
    fixed_dt: float | None = None

    def __post_init__(self):
        if not self.c_dt > 0:
            raise ValueError("c_dt must be positive")
        if not self.dt_floor > 0:
            raise ValueError("dt_floor must be positive")
        if self.dt_max is not None and not self.dt_floor < self.dt_max:
            raise ValueError("need dt_floor < dt_max")
        if self.recompute_every < 1:
            raise ValueError("recompute_every must be >= 1")

    def max_step(self, grid: Grid) -> float:
        return self.dt_max if self.dt_max is not None else 1e-3 * grid.extent

    def step_size(self, sup_u: float, grid: Grid) -> float:
        if self.fixed_dt is not None:
            return self.fixed_dt
        cap = self.max_step(grid)
        if sup_u <= 0:
            return cap
        return min(self.c_dt / sup_u, cap)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StopSpec:
    max_time: float = math.inf
    max_sup: float = math.inf

    def __post_init__(self):
        if math.isinf(self.max_time) and math.isinf(self.max_sup):
            raise ValueError("a run needs a finite max_time or max_sup")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    norm_history: list[NormRecord]
    snapshots: list[SolutionState]
    stop_reason: StopReason
    steps_taken: int
    final: SolutionState
    model: ModelSpec
    policy: StepPolicy
    stop: StopSpec
    extras: dict[str, np.ndarray] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.norm_history])

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    @property
    def sup_u(self) -> np.ndarray:
        return self.column("sup_u")


def _check_finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.isfinite(a).all():
            raise NonFiniteState("non-finite values in state")


def _rk4_arrays(grid: Grid, u, v, model: ModelSpec, dt: float,
                include_viscous: bool):
    f = rhs_values
    k1u, k1v = f(grid, u, v, model, include_viscous)
    k2u, k2v = f(grid, u + 0.5 * dt * k1u, v + 0.5 * dt * k1v, model, include_viscous)
    k3u, k3v = f(grid, u + 0.5 * dt * k2u, v + 0.5 * dt * k2v, model, include_viscous)
    k4u, k4v = f(grid, u + dt * k3u, v + dt * k3v, model, include_viscous)
    u_new = u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    v_new = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return u_new, v_new


def _spectral_nonlinearity(grid: Grid, model: ModelSpec):
    n = grid.n
    sym = hilbert_symbol(grid)
    rfft, irfft = np.fft.rfft, np.fft.irfft
    if model.variant is Variant.CLM:
        c = model.clm_coeff

        def nonlinear(uh, vh):
            u = irfft(uh, n)
            return rfft(c * u * irfft(sym * uh, n)), np.zeros_like(vh)
    else:
        alpha = model.alpha
        beta = model.hilbert_sign * model.beta

        def nonlinear(uh, vh):
            u = irfft(uh, n)
            v = irfft(vh, n)
            return rfft(alpha * u * v), beta * sym * rfft(u * u)
    return nonlinear


def _if_rk4_arrays(grid: Grid, u, v, model: ModelSpec, dt: float,
                   nonlinear: bool = True):
    # Lawson RK4 on e^{nu k^2 (t - t_n)} u_hat; exponents stay within one step
    n = grid.n
    decay = -model.nu * grid.wavenumbers ** 2
    e_half = np.exp(0.5 * dt * decay)
    e_full = e_half * e_half
    uh = np.fft.rfft(u)
    vh = np.fft.rfft(v)
    vh_decay = e_full if model.variant is not Variant.CLM else np.ones_like(e_full)
    vh_half = e_half if model.variant is not Variant.CLM else np.ones_like(e_half)
    if not nonlinear:
        return np.fft.irfft(e_full * uh, n), np.fft.irfft(vh_decay * vh, n)
    N = _spectral_nonlinearity(grid, model)
    a1, b1 = N(uh, vh)
    a2, b2 = N(e_half * (uh + 0.5 * dt * a1), vh_half * (vh + 0.5 * dt * b1))
    a3, b3 = N(e_half * uh + 0.5 * dt * a2, vh_half * vh + 0.5 * dt * b2)
    a4, b4 = N(e_full * uh + dt * e_half * a3, vh_decay * vh + dt * vh_half * b3)
    uh_new = e_full * uh + dt / 6.0 * (e_full * a1 + 2.0 * e_half * (a2 + a3) + a4)
    vh_new = vh_decay * vh + dt / 6.0 * (vh_decay * b1 + 2.0 * vh_half * (b2 + b3) + b4)
    return np.fft.irfft(uh_new, n), np.fft.irfft(vh_new, n)


def _advance(state: SolutionState, u, v, dt: float) -> SolutionState:
    _check_finite(u, v)
    return SolutionState.from_arrays(state.grid, u, v, state.t + dt,
                                     compact=state.u.compact, meta=state.meta)


def rk4_step(state: SolutionState, model: ModelSpec, dt: float) -> SolutionState:
    """One classical RK4 step.

    With ``nu > 0`` the viscous terms are treated explicitly (periodic grids
    only); :func:`run` uses :func:`integrating_factor_rk4_step` for those.
    Raises :class:`NonFiniteState` if the step produces NaN or inf.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if model.nu > 0 and not state.grid.is_periodic:
        raise ValueError("viscous runs are only supported on periodic grids")
    u, v = _rk4_arrays(state.grid, state.u.values, state.v.values, model, dt,
                       include_viscous=model.nu > 0)
    return _advance(state, u, v, dt)


def integrating_factor_rk4_step(state: SolutionState, model: ModelSpec, dt: float,
                                nonlinear: bool = True) -> SolutionState:
    """RK4 applied to ``e^{nu k^2 t} u_hat`` so the viscous part is exact.

    ``nonlinear=False`` switches the nonlinear terms off, leaving the pure
    heat semigroup (useful for checking the linear part).
    """
    if not state.grid.is_periodic:
        raise ValueError("integrating factor needs a periodic grid")
    if not model.nu > 0:
        raise ValueError("integrating factor needs nu > 0; use rk4_step")
    if not dt > 0:
        raise ValueError("dt must be positive")
    u, v = _if_rk4_arrays(state.grid, state.u.values, state.v.values, model, dt,
                          nonlinear)
    return _advance(state, u, v, dt)


Observer = Callable[[SolutionState], float]


def run(initial: SolutionState, model: ModelSpec, policy: StepPolicy | None = None,
        stop: StopSpec | None = None, snapshot_thresholds: Sequence[float] = (),
        observers: Mapping[str, Observer] | None = None,
        record_every: int = 1) -> RunResult:
    """Advance ``initial`` until a stopping criterion fires.

    A :class:`NormRecord` is stored every ``record_every`` steps (the BKM
    integral is still accumulated every step).  A snapshot is taken the first
    time ``|u|_inf`` reaches each of ``snapshot_thresholds``.  ``observers``
    map names to scalar functions of the state, evaluated at every record.
    """
    policy = policy or StepPolicy()
    stop = stop or StopSpec(max_time=1.0)
    grid = initial.grid
    if model.nu > 0 and not grid.is_periodic:
        raise ValueError("viscous runs are only supported on periodic grids")
    if model.nu > 0:
        def step(u, v, dt):
            return _if_rk4_arrays(grid, u, v, model, dt)
    else:
        def step(u, v, dt):
            return _rk4_arrays(grid, u, v, model, dt, include_viscous=False)

    compact = initial.u.compact
    observers = dict(observers or {})
    extras: dict[str, list[float]] = {name: [] for name in observers}
    thresholds = sorted(float(x) for x in snapshot_thresholds)
    snapshots: list[SolutionState] = []

    u = np.array(initial.u.values)
    v = np.array(initial.v.values)
    t = float(initial.t)

    def make_state():
        return SolutionState.from_arrays(grid, u, v, t, compact=compact,
                                         meta=initial.meta)

    def observe():
        if observers:
            s = make_state()
            for name, fn in observers.items():
                extras[name].append(float(fn(s)))

    rec = norm_record(grid, u, v, t, bkm_integral=0.0)
    history = [rec]
    observe()
    sup_u, integrand, bkm = rec.sup_u, rec.bkm_integrand, 0.0
    steps = 0
    dt = policy.step_size(sup_u, grid)
    reason = None

    while reason is None:
        if sup_u >= stop.max_sup:
            reason = StopReason.SUP_NORM_THRESHOLD
            break
        if t >= stop.max_time:
            reason = StopReason.MAX_TIME
            break
        if steps % policy.recompute_every == 0:
            dt = policy.step_size(sup_u, grid)
        if dt < policy.dt_floor:
            reason = StopReason.DT_FLOOR
            break
        with np.errstate(over="ignore", invalid="ignore"):
            u_new, v_new = step(u, v, dt)
        sup_new = float(np.max(np.abs(u_new)))
        sup_v_new = float(np.max(np.abs(v_new)))
        if not (math.isfinite(sup_new) and math.isfinite(sup_v_new)):
            reason = StopReason.NON_FINITE
            break
        u, v = u_new, v_new
        t += dt
        steps += 1
        new_integrand = sup_new + sup_v_new
        bkm += 0.5 * dt * (integrand + new_integrand)
        sup_u, integrand = sup_new, new_integrand

        while thresholds and sup_u >= thresholds[0]:
            snap = make_state()
            snap.meta = {**snap.meta, "threshold": thresholds.pop(0), "step": steps}
            snapshots.append(snap)

        if steps % record_every == 0:
            history.append(norm_record(grid, u, v, t, dt=dt, bkm_integral=bkm))
            observe()

    if history[-1].t != t:
        history.append(norm_record(grid, u, v, t, dt=dt, bkm_integral=bkm))
        observe()
    log.info("run stopped after %d steps at t=%.15g (%s), |u|_inf=%.6g",
             steps, t, reason.value, sup_u)
    return RunResult(history, snapshots, reason, steps, make_state(), model, policy,
                     stop, {k: np.array(val) for k, val in extras.items()})
