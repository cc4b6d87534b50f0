"""Certificates for finite-time blow-up and for global regularity.

Blow-up side: with ``phi(x) = x - a`` on the support ``[a, b]`` of ``u0``,
the weighted mass ``F(t) = int phi u^2`` of a solution of
``u_t = 2uv, v_t = H(u^2)`` obeys ``F_tt >= kappa F^2``, which forces blow-up
no later than

    T* = (2 kappa C / 3)^(-1/3) I_inf,   C = F_t(0) = 4 int phi u0^2 v0,

with ``kappa = 2 / (pi (b - a)^2)`` on the line and an extra factor
``cos((b - a) / 2)`` on the 2pi-periodic circle.  ``I_inf`` is the improper
integral of ``1 / sqrt(y^3 + 1)`` over ``[0, inf)``.

Regularity side: small ``u0`` on a short support where ``v0 <= -3`` decays
like ``e^{-3t}``.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .analysis import BlowupFit, FitWindow, fit_blowup
from .dynamics import ModelSpec, Variant
from .grid import Field, SolutionState, derivative_values, l2_norm

LINE_KIND = "line"
PERIODIC_KIND = "periodic"
CLM_KIND = "clm"
_KINDS = (LINE_KIND, PERIODIC_KIND, CLM_KIND)


def _integrand(y):
    return 1.0 / math.sqrt(y ** 3 + 1.0)


def _tail_integrand(s):
    # y = s^-2 maps [1, inf) onto (0, 1]
    return 2.0 / math.sqrt(1.0 + s ** 6)


def incomplete_blowup_integral(x: float) -> float:
    """``I(x) = int_0^x dy / sqrt(y^3 + 1)``; ``x = math.inf`` gives ``I_inf``.

    The range beyond ``y = 1`` is mapped to a bounded interval by
    ``y = s^-2`` so every quadrature is over a smooth finite integrand.
    """
    x = float(x)
    if math.isnan(x) or x < 0:
        raise ValueError(f"I(x) needs x >= 0, got {x}")
    opts = {"epsabs": 1e-14, "epsrel": 1e-13, "limit": 200}
    if x <= 1.0:
        return quad(_integrand, 0.0, x, **opts)[0]
    head = quad(_integrand, 0.0, 1.0, **opts)[0]
    s_lo = 0.0 if math.isinf(x) else 1.0 / math.sqrt(x)
    return head + quad(_tail_integrand, s_lo, 1.0, **opts)[0]


@lru_cache(maxsize=1)
def i_infinity() -> float:
    return incomplete_blowup_integral(math.inf)


@dataclass(frozen=True)
class BlowupCertificate:
    kind: str
    support: tuple[float, float]
    C_functional: float
    T_star: float
    I_infty: float
    applicable: bool
    kappa: float
    F0: float
    reason: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["support"] = list(self.support)
        return d


def _support(u0: Field, support) -> tuple[float, float]:
    if support is not None:
        return float(support[0]), float(support[1])
    if u0.grid.support is None:
        raise ValueError("u0 carries no support interval; pass support=(a, b)")
    return u0.grid.support


def _weight(u0: Field, a: float, b: float) -> np.ndarray:
    x = u0.grid.points
    return np.where((x >= a) & (x <= b), x - a, 0.0)


def blowup_certificate(u0: Field, v0: Field, kind: str = LINE_KIND,
                       support: tuple[float, float] | None = None) -> BlowupCertificate:
    """Evaluate the blow-up functional and the resulting time bound.

    ``kind`` is ``"line"``, ``"periodic"`` or ``"clm"``.  Periodic bounds
    are stated for period 2pi; other periods are rescaled to it, which
    leaves the bound unchanged apart from the cosine factor.  When the
    functional is not positive the certificate is returned with
    ``applicable=False`` and ``T_star = inf``.  Raises for periodic data
    whose support is at least half a period long.
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown certificate kind {kind!r}")
    a, b = _support(u0, support)
    width = b - a
    grid = u0.grid
    phi = _weight(u0, a, b)
    u, v = u0.values, v0.values
    F0 = grid.integrate(phi * u * u)
    I_inf = i_infinity()

    if kind == CLM_KIND:
        mass = grid.integrate(phi * u)
        ok = bool(np.all(u >= 0) and mass > 0)
        kappa = 1.0 / (2.0 * math.pi * width ** 2)
        T = 2.0 * math.pi * width ** 2 / mass if ok else math.inf
        reason = "" if ok else "needs u0 >= 0 with positive weighted mass"
        return BlowupCertificate(kind, (a, b), float(mass), T, I_inf, ok, kappa,
                                 float(grid.integrate(phi * u)), reason)

    C = 4.0 * grid.integrate(phi * u * u * v)
    M = 2.0
    if kind == PERIODIC_KIND:
        if not grid.is_periodic:
            raise ValueError("periodic certificate needs a periodic grid")
        scaled = 2.0 * math.pi / grid.extent * width
        if not scaled < math.pi:
            raise ValueError("periodic bound needs a support shorter than half a period")
        M = 2.0 * math.cos(0.5 * scaled)
    kappa = M / (math.pi * width ** 2)
    ok = C > 0
    T = (2.0 * kappa * C / 3.0) ** (-1.0 / 3.0) * I_inf if ok else math.inf
    reason = "" if ok else "blow-up functional is not positive"
    return BlowupCertificate(kind, (a, b), float(C), float(T), I_inf, bool(ok),
                             float(kappa), float(F0), reason)


def weighted_mass(a: float, b: float, power: int = 2) -> Callable[[SolutionState], float]:
    """Observer ``state -> int_a^b (x - a) u^power dx`` for :func:`run`."""
    def observe(state: SolutionState) -> float:
        phi = _weight(state.u, a, b)
        return state.grid.integrate(phi * state.u.values ** power)
    return observe


MASS_OBSERVER = "weighted_mass"


@dataclass
class BoundReport:
    T_fit: float
    T_star: float
    time_bound_ok: bool
    inequality_ok: bool
    worst_ratio: float
    F: np.ndarray
    F_t: np.ndarray
    lower: np.ndarray

    @property
    def ok(self) -> bool:
        return self.time_bound_ok and self.inequality_ok


def verify_bound(run, cert: BlowupCertificate, fit: BlowupFit | None = None,
                 rtol: float = 1e-3) -> BoundReport:
    """Check a blow-up run against its certificate.

    The run must record ``int phi u^2`` (``int phi u`` for CLM) under the
    observer name ``"weighted_mass"``; see :func:`weighted_mass`.  Checks the
    fitted blow-up time against ``T_star`` and the integrated inequality

        F_t >= sqrt((2 kappa / 3) (F^3 - F0^3) + C^2)         (full system)
        F_t >= kappa F^2                                      (CLM)

    at every record, with ``F_t`` from second-order finite differences.
    """
    if not cert.applicable:
        raise ValueError(f"certificate not applicable: {cert.reason}")
    model: ModelSpec = run.model
    if cert.kind == CLM_KIND:
        if model.variant is not Variant.CLM or model.clm_coeff != 1.0:
            raise ValueError("CLM certificate needs a u_t = u Hu run")
    elif (model.variant is not Variant.FULL or model.alpha != 2.0 or model.beta != 1.0
          or model.nu != 0.0):
        raise ValueError("blow-up certificates hold for alpha=2, beta=1, nu=0")
    if MASS_OBSERVER not in run.extras:
        raise ValueError("run lacks the 'weighted_mass' observer")
    clm = cert.kind == CLM_KIND
    if fit is None:
        fit = fit_blowup(run, FitWindow(decades=1.0), free_exponent=clm)
    # CLM growth near a zero of order m of u0 goes like (T - t)^-m, so the
    # free-exponent time is the measurement there
    T_fit = fit.T_free if clm and fit.T_free is not None else fit.T
    t = run.times
    F = np.asarray(run.extras[MASS_OBSERVER])
    F_t = np.gradient(F, t, edge_order=2)
    if clm:
        lower = cert.kappa * F * F
    else:
        lower = np.sqrt(np.maximum(2.0 * cert.kappa / 3.0 * (F ** 3 - F[0] ** 3)
                                   + cert.C_functional ** 2, 0.0))
    ratio = F_t / lower
    worst = float(ratio.min())
    return BoundReport(T_fit, cert.T_star, bool(T_fit <= cert.T_star),
                       bool(worst >= 1.0 - rtol), worst, F, F_t, lower)


@dataclass(frozen=True)
class RegularityCertificate:
    delta: float
    lhs: float
    v0_max_on_support: float
    smallness_ok: bool
    sign_ok: bool
    u0x_l2: float
    v0x_l2: float
    v0_l2: float

    @property
    def satisfied(self) -> bool:
        return self.smallness_ok and self.sign_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["satisfied"] = self.satisfied
        return d

    @property
    def sup_decay_constant(self) -> float:
        """``delta^(1/2) |u0_x|``, the prefactor of the ``e^{-3t}`` bound."""
        return math.sqrt(self.delta) * self.u0x_l2

    @property
    def v_h1_bound(self) -> float:
        l2 = self.v0_l2 + self.delta * self.u0x_l2 ** 2 / 6.0
        dx = self.v0x_l2 + math.sqrt(self.delta) * self.u0x_l2 ** 2 / 3.0
        return math.hypot(l2, dx)


def regularity_lhs(delta: float, v0x_l2: float, u0x_l2_sq: float) -> float:
    return math.sqrt(delta) * (v0x_l2 + math.sqrt(delta) * u0x_l2_sq / 3.0)


def check_global_regularity(u0: Field, v0: Field,
                            support: tuple[float, float] | None = None
                            ) -> RegularityCertificate:
    """Evaluate the small-data / negative-``v0`` hypothesis on ``supp(u0)``."""
    a, b = _support(u0, support)
    grid = u0.grid
    delta = b - a
    u0x = l2_norm(grid, derivative_values(grid, u0.values))
    v0x = l2_norm(grid, derivative_values(grid, v0.values))
    lhs = regularity_lhs(delta, v0x, u0x ** 2)
    x = grid.points
    on_support = (x >= a) & (x <= b)
    v_max = float(v0.values[on_support].max()) if on_support.any() else -math.inf
    return RegularityCertificate(delta, lhs, v_max, lhs < 0.25, v_max <= -3.0,
                                 u0x, v0x, l2_norm(grid, v0.values))


@dataclass
class DecayReport:
    rate_sup: float
    rate_h1: float
    sup_bound_ok: bool
    v_h1_max: float
    v_h1_bound: float

    @property
    def rate_ok(self) -> bool:
        return self.rate_sup <= -2.9

    @property
    def ok(self) -> bool:
        return self.rate_ok and self.sup_bound_ok and self.v_h1_max <= self.v_h1_bound


def _decay_rate(t: np.ndarray, y: np.ndarray) -> float:
    if np.all(y <= 0):
        return -math.inf
    keep = y > 0
    return float(np.polyfit(t[keep], np.log(y[keep]), 1)[0])


def verify_decay(run, cert: RegularityCertificate, tail: float = 0.5) -> DecayReport:
    """Decay rates of ``|u|_inf`` and ``|u|_H1`` over the final ``tail`` of the run.

    Also checks ``|u|_inf <= delta^(1/2) |u0_x| e^{-3t}`` at every record and
    compares ``max_t |v|_H1`` with the bound built from the data.
    """
    if not cert.satisfied:
        raise ValueError("regularity certificate is not satisfied")
    model: ModelSpec = run.model
    if (model.variant is not Variant.FULL or model.alpha != 2.0 or model.beta != 1.0
            or model.nu != 0.0):
        raise ValueError("the decay estimate holds for alpha=2, beta=1, nu=0")
    t = run.times
    sup = run.column("sup_u")
    h1 = run.column("h1_u")
    cut = t >= t[0] + (1.0 - tail) * (t[-1] - t[0])
    bound = cert.sup_decay_constant * np.exp(-3.0 * t)
    sup_ok = bool(np.all(sup <= bound * (1.0 + 1e-9) + 1e-300))
    return DecayReport(_decay_rate(t[cut], sup[cut]), _decay_rate(t[cut], h1[cut]),
                       sup_ok, float(run.column("h1_v").max()), cert.v_h1_bound)
