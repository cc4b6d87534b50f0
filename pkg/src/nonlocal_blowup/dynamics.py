"""Right-hand sides of the nonlocal system and its variants.

The general system is

    u_t = alpha u v + nu u_xx,      v_t = s beta H(u^2) + nu v_xx,

with ``s = +1`` for the full system and ``s = -1`` for the sign-flipped
variant.  The CLM variant evolves ``u_t = c u H(u)`` (``c = 1``) or its
squared form ``w_t = 4 w H(w)`` (``c = 4``), carrying ``v`` along unchanged.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .grid import Field, Grid, SolutionState
from .hilbert import hilbert_values


class Variant(str, Enum):
    FULL = "full"
    CLM = "clm"
    SIGN_FLIPPED = "sign_flipped"


@dataclass(frozen=True)
class ModelSpec:
    alpha: float = 1.0
    beta: float = 1.0
    nu: float = 0.0
    variant: Variant = Variant.FULL
    clm_coeff: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.alpha * self.beta > 0:
            raise ValueError(f"need alpha*beta > 0, got alpha={self.alpha}, beta={self.beta}")
        if self.nu < 0:
            raise ValueError(f"viscosity must be nonnegative, got {self.nu}")

    @property
    def hilbert_sign(self) -> float:
        return -1.0 if self.variant is Variant.SIGN_FLIPPED else 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d


@dataclass(frozen=True)
class ScalingParams:
    gamma: float
    mu: float


def normalize_scaling(model: ModelSpec) -> ScalingParams:
    """Map the (alpha, beta) system onto ``u_t = 2uv, v_t = H(u^2)``.

    If (u~, v~) solves the canonical system then ``u(x, t) = u~(x, gamma t)``,
    ``v(x, t) = mu v~(x, gamma t)`` solves the (alpha, beta) one.
    """
    a, b = model.alpha, model.beta
    if not a * b > 0:
        raise ValueError(f"scaling needs alpha*beta > 0, got {a * b}")
    return ScalingParams(math.sqrt(a * b / 2.0), math.copysign(math.sqrt(2.0 * b / a), a))


def _second_derivative(grid: Grid, values: np.ndarray) -> np.ndarray:
    coeffs = np.fft.rfft(values) * (-grid.wavenumbers ** 2)
    if grid.n % 2 == 0:
        coeffs[-1] = 0.0
    return np.fft.irfft(coeffs, grid.n)


def rhs_values(grid: Grid, u: np.ndarray, v: np.ndarray, model: ModelSpec,
               include_viscous: bool = False) -> tuple[np.ndarray, np.ndarray]:
    if model.variant is Variant.CLM:
        du = model.clm_coeff * u * hilbert_values(grid, u)
        dv = np.zeros_like(v)
    else:
        du = model.alpha * u * v
        dv = (model.hilbert_sign * model.beta) * hilbert_values(grid, u * u)
    if include_viscous and model.nu > 0:
        if not grid.is_periodic:
            raise ValueError("viscous runs are only supported on periodic grids")
        du = du + model.nu * _second_derivative(grid, u)
        if model.variant is not Variant.CLM:
            dv = dv + model.nu * _second_derivative(grid, v)
    return du, dv


def rhs(state: SolutionState, model: ModelSpec,
        include_viscous: bool = False) -> tuple[Field, Field]:
    """Time derivatives (du/dt, dv/dt) of a state.

    Viscous terms are added only with ``include_viscous=True``; the
    integrating-factor stepper treats them exactly instead.
    """
    du, dv = rhs_values(state.grid, state.u.values, state.v.values, model,
                        include_viscous)
    return Field(state.grid, du), Field(state.grid, dv)


def clm_rhs(w: Field, coeff: float = 1.0) -> Field:
    """``coeff * w * H(w)``: 1 for ``u_t = u Hu``, 4 for ``w_t = 4 w Hw``."""
    return Field(w.grid, coeff * w.values * hilbert_values(w.grid, w.values))
