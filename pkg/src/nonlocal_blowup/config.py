"""Run configurations, canonical initial data and named presets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .analysis import FitWindow
from .dynamics import ModelSpec
from .grid import Grid, SolutionState, make_grid
from .integrator import StepPolicy, StopSpec

IC1, IC2, IC3, CUSTOM = "ic1", "ic2", "ic3", "custom"
INITIAL_CONDITIONS = (IC1, IC2, IC3, CUSTOM)

# IC1 lives on [0.45, 0.55]; the line grid is truncated to a slightly wider
# interval so the grid resolves the collapsing peak
IC1_SUPPORT = (0.45, 0.55)
IC1_DOMAIN = (0.44, 0.56)


def _float_or_none(x):
    return None if x is None else float(x)


@dataclass
class RunConfig:
    name: str = "custom"
    model: ModelSpec = field(default_factory=ModelSpec)
    grid: dict = field(default_factory=lambda: {"kind": "periodic", "n": 1024})
    initial_condition: str = IC2
    u_expr: str | None = None
    v_expr: str | None = None
    policy: StepPolicy = field(default_factory=StepPolicy)
    stop: StopSpec = field(default_factory=lambda: StopSpec(max_sup=1e4))
    snapshot_thresholds: tuple[float, ...] = ()
    fit_window: FitWindow = field(default_factory=lambda: FitWindow(decades=1.0))
    record_every: int = 1
    profile_xi_max: float | None = None
    profile_points: int = 801
    output_dir: str | None = None

    def __post_init__(self):
        if self.initial_condition not in INITIAL_CONDITIONS:
            raise ValueError(f"unknown initial condition {self.initial_condition!r}")
        if self.initial_condition == CUSTOM and self.u_expr is None:
            raise ValueError("custom initial condition needs u_expr")
        kind = self.grid.get("kind", "periodic")
        if self.initial_condition == IC1 and kind != "line":
            raise ValueError("IC1 needs a line grid")
        if self.initial_condition in (IC2, IC3) and kind != "periodic":
            raise ValueError(f"{self.initial_condition.upper()} needs a periodic grid")
        if self.model.nu > 0 and kind != "periodic":
            raise ValueError("viscous runs need a periodic grid")
        self.snapshot_thresholds = tuple(float(x) for x in self.snapshot_thresholds)

    def make_grid(self) -> Grid:
        return make_grid(self.grid)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "model": self.model.to_dict(),
            "grid": dict(self.grid),
            "initial_condition": self.initial_condition,
            "u_expr": self.u_expr,
            "v_expr": self.v_expr,
            "policy": self.policy.to_dict(),
            "stop": self.stop.to_dict(),
            "snapshot_thresholds": list(self.snapshot_thresholds),
            "fit_window": self.fit_window.to_dict(),
            "record_every": self.record_every,
            "profile_xi_max": self.profile_xi_max,
            "profile_points": self.profile_points,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RunConfig:
        stop = d.get("stop", {})
        pol = d.get("policy", {})
        win = d.get("fit_window", {})
        return cls(
            name=d.get("name", "custom"),
            model=ModelSpec(**d.get("model", {})),
            grid=dict(d.get("grid", {"kind": "periodic", "n": 1024})),
            initial_condition=d.get("initial_condition", IC2),
            u_expr=d.get("u_expr"),
            v_expr=d.get("v_expr"),
            policy=StepPolicy(**pol),
            stop=StopSpec(max_time=float(stop.get("max_time", math.inf)),
                          max_sup=float(stop.get("max_sup", math.inf))),
            snapshot_thresholds=tuple(d.get("snapshot_thresholds", ())),
            fit_window=FitWindow(**win) if win else FitWindow(decades=1.0),
            record_every=int(d.get("record_every", 1)),
            profile_xi_max=_float_or_none(d.get("profile_xi_max")),
            profile_points=int(d.get("profile_points", 801)),
            output_dir=d.get("output_dir"),
        )

    def with_overrides(self, n: int | None = None, nu: float | None = None,
                       alpha: float | None = None, stop_sup: float | None = None,
                       stop_time: float | None = None,
                       output_dir: str | None = None) -> RunConfig:
        grid = dict(self.grid)
        if n is not None:
            grid["n"] = int(n)
        model = self.model
        if nu is not None:
            model = replace(model, nu=float(nu))
        if alpha is not None:
            model = replace(model, alpha=float(alpha))
        stop = self.stop
        if stop_sup is not None or stop_time is not None:
            stop = StopSpec(
                max_time=stop.max_time if stop_time is None else float(stop_time),
                max_sup=stop.max_sup if stop_sup is None else float(stop_sup))
        return replace(self, grid=grid, model=model, stop=stop,
                       output_dir=self.output_dir if output_dir is None else output_dir)


def ic1_bump(x: np.ndarray) -> np.ndarray:
    """``exp(1 - 1/(1 - s^2))`` with ``s = (x - 0.5)/0.05``, zero for ``|s| >= 1``."""
    s = (np.asarray(x, dtype=np.float64) - 0.5) / 0.05
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def ic2(x: np.ndarray) -> np.ndarray:
    return 2.0 + np.sin(2.0 * np.pi * x) + np.cos(4.0 * np.pi * x)


def ic3(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.2 + np.cos(2.0 * np.pi * x))


_EXPR_NAMESPACE = {name: getattr(np, name) for name in (
    "sin", "cos", "tan", "exp", "log", "sqrt", "abs", "where", "tanh", "cosh",
    "sinh", "arctan", "maximum", "minimum", "heaviside")}
_EXPR_NAMESPACE.update(pi=np.pi, e=np.e, np=np)


def evaluate_expression(expr: str, x: np.ndarray) -> np.ndarray:
    """Evaluate an expression in ``x`` with numpy functions in scope."""
    values = eval(expr, {"__builtins__": {}}, {**_EXPR_NAMESPACE, "x": x})
    return np.broadcast_to(np.asarray(values, dtype=np.float64), x.shape).copy()


def build_initial_condition(config: RunConfig, grid: Grid | None = None) -> SolutionState:
    grid = grid or config.make_grid()
    ic = config.initial_condition
    x = grid.points
    if ic == IC1:
        if grid.is_periodic:
            raise ValueError("IC1 needs a line grid")
        if grid.support is None or not (grid.support[0] <= IC1_SUPPORT[0]
                                         and IC1_SUPPORT[1] <= grid.support[1]):
            raise ValueError(f"IC1 needs a grid whose support contains {IC1_SUPPORT}")
        return SolutionState.from_arrays(grid, ic1_bump(x), np.zeros(grid.n),
                                         compact=True, meta={"ic": ic})
    if ic in (IC2, IC3):
        if not grid.is_periodic:
            raise ValueError(f"{ic.upper()} needs a periodic grid")
        u = ic2(x) if ic == IC2 else ic3(x)
        return SolutionState.from_arrays(grid, u, np.zeros(grid.n), meta={"ic": ic})
    u = evaluate_expression(config.u_expr, x)
    v = (evaluate_expression(config.v_expr, x) if config.v_expr
         else np.zeros(grid.n))
    compact = grid.support is not None and not np.any(u[~grid.support_mask])
    return SolutionState.from_arrays(grid, u, v, compact=compact, meta={"ic": ic})


def _ic1(n: int, stop_sup: float) -> RunConfig:
    return RunConfig(
        name=f"ic1-inviscid-n{int(math.log2(n))}",
        grid={"kind": "line", "n": n, "domain": list(IC1_DOMAIN),
              "support": list(IC1_SUPPORT)},
        initial_condition=IC1,
        stop=StopSpec(max_sup=stop_sup),
        snapshot_thresholds=(3948.0, 17617.0, 78422.0),
    )


def _periodic(ic: str, n: int, nu: float, stop_sup: float, label: str) -> RunConfig:
    return RunConfig(
        name=f"{ic}-{label}-n{int(math.log2(n))}",
        model=ModelSpec(nu=nu),
        grid={"kind": "periodic", "n": n},
        initial_condition=ic,
        stop=StopSpec(max_sup=stop_sup),
        snapshot_thresholds=(stop_sup / 100.0, stop_sup / 10.0, stop_sup),
    )


def _build_presets() -> dict[str, RunConfig]:
    presets = [_ic1(4096, 1e5), _ic1(16384, 2e5)]
    for ic in (IC2, IC3):
        presets.append(_periodic(ic, 8192, 0.0, 2e4, "inviscid"))
        presets.append(_periodic(ic, 16384, 0.0, 5e4, "inviscid"))
        presets.append(_periodic(ic, 16384, 1e-3, 1e5, "viscous-nu1e-3"))
        presets.append(_periodic(ic, 16384, 1e-2, 1e5, "viscous-nu1e-2"))
    return {p.name: p for p in presets}


PRESETS = _build_presets()


def get_preset(name: str) -> RunConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
