import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nonlocal_blowup.config import ic1_bump
from nonlocal_blowup.grid import (Field, Grid, SolutionState, derivative, fd4_derivative_values,
                                  line_grid, make_grid, norm_record, norms, periodic_grid,
                                  spectral_derivative)


def test_periodic_points():
    g = make_grid({"kind": "periodic", "n": 8, "period": 1.0})
    assert np.array_equal(g.points, np.arange(8) * 0.125)


def test_line_spacing():
    g = make_grid({"kind": "line", "n": 16, "support": [0.45, 0.55]})
    assert g.h == 1.0 / 16
    assert g.support == (0.45, 0.55)


@pytest.mark.parametrize("spec", [
    {"kind": "periodic", "n": 12},
    {"kind": "periodic", "n": 4},
    {"kind": "line", "n": 16, "support": [0.0, 0.5]},
    {"kind": "line", "n": 16, "support": [0.5, 1.2]},
    {"kind": "line", "n": 16},
    {"kind": "sphere", "n": 16},
])
def test_make_grid_rejects(spec):
    with pytest.raises(ValueError):
        make_grid(spec)


@given(st.integers(3, 14), st.floats(0.1, 10.0))
def test_extent_consistency(p, period):
    g = periodic_grid(2 ** p, period)
    assert math.isclose(g.h * g.n, g.extent, rel_tol=4e-16)
    assert g.points[-1] < g.x_hi


def test_grid_spec_round_trip():
    for g in (periodic_grid(64, 2.0, -1.0), line_grid(32, (0.4, 0.6), (0.0, 2.0))):
        assert make_grid(g.to_spec()) == g


def test_compact_tag_checked():
    g = line_grid(64, (0.4, 0.6))
    x = g.points
    Field(g, np.where((x >= 0.4) & (x <= 0.6), 1.0, 0.0), compact=True)
    with pytest.raises(ValueError):
        Field(g, np.ones(64), compact=True)


def test_field_values_read_only():
    f = Field(periodic_grid(8), np.arange(8.0))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


@settings(max_examples=50)
@given(arrays(np.float64, 64, elements=st.floats(-1e6, 1e6)))
def test_dft_round_trip(values):
    f = Field(periodic_grid(64), values)
    back = np.fft.irfft(f.spectral, 64)
    scale = max(np.abs(values).max(), 1e-300)
    assert np.abs(back - values).max() <= 1e-12 * scale


@settings(max_examples=50)
@given(arrays(np.float64, 128, elements=st.floats(-1e3, 1e3)))
def test_parseval(values):
    g = periodic_grid(128, 2.0)
    scale = max(np.abs(values).max(), 1e-300)  # keeps |spec|^2 clear of underflow
    spec = np.fft.rfft(values / scale)
    weights = np.full(spec.size, 2.0)
    weights[0] = weights[-1] = 1.0
    spectral = scale * math.sqrt(g.extent * np.sum(weights * np.abs(spec) ** 2) / g.n ** 2)
    phys = norm_record(g, values, values, 0.0).l2_u
    assert phys == pytest.approx(spectral, rel=1e-10, abs=1e-300)


def test_spectral_derivative_examples():
    g = periodic_grid(64)
    x = g.points
    d = spectral_derivative(Field(g, np.sin(2 * np.pi * x))).values
    assert np.abs(d - 2 * np.pi * np.cos(2 * np.pi * x)).max() < 1e-10
    d = spectral_derivative(Field(g, np.sin(2 * np.pi * x) + np.cos(4 * np.pi * x))).values
    exact = 2 * np.pi * np.cos(2 * np.pi * x) - 4 * np.pi * np.sin(4 * np.pi * x)
    assert np.abs(d - exact).max() < 1e-10


@given(st.floats(-1e6, 1e6))
def test_spectral_derivative_of_constant(c):
    g = periodic_grid(32)
    assert np.all(spectral_derivative(Field(g, np.full(32, c))).values == 0.0)


def test_spectral_derivative_rejects_line():
    g = line_grid(32, (0.4, 0.6))
    with pytest.raises(ValueError):
        spectral_derivative(Field(g, np.zeros(32)))


def test_fd4_order():
    errs = []
    for n in (64, 128):
        x = np.linspace(0.0, 1.0, n, endpoint=False)
        h = x[1]
        d = fd4_derivative_values(np.exp(np.sin(3 * x)), h)
        errs.append(np.abs(d - 3 * np.cos(3 * x) * np.exp(np.sin(3 * x))).max())
    assert math.log2(errs[0] / errs[1]) > 3.7


def test_line_derivative_dispatch():
    g = line_grid(256, (0.2, 0.8))
    x = g.points
    d = derivative(Field(g, x ** 3)).values
    assert np.abs(d - 3 * x ** 2).max() < 1e-10


def test_norms_zero():
    g = periodic_grid(16)
    rec = norms(SolutionState.from_arrays(g, np.zeros(16), np.zeros(16)))
    assert (rec.sup_u, rec.sup_v, rec.l2_u, rec.l2_v, rec.h1_u, rec.h1_v,
            rec.bkm_integrand, rec.bkm_integral) == (0,) * 8


def test_norms_sine():
    g = periodic_grid(256)
    rec = norms(SolutionState.from_arrays(g, np.sin(2 * np.pi * g.points), np.zeros(256)))
    assert rec.l2_u == pytest.approx(1 / math.sqrt(2), abs=1e-10)
    assert rec.h1_u == pytest.approx(math.sqrt(0.5 + 2 * np.pi ** 2), rel=1e-12)


def test_norms_ic1_peak():
    g = line_grid(4096, (0.45, 0.55))
    rec = norms(SolutionState.from_arrays(g, ic1_bump(g.points), np.zeros(4096), compact=True))
    assert rec.sup_u == 1.0


@settings(max_examples=30)
@given(st.lists(st.floats(0.001, 0.1), min_size=2, max_size=10), st.integers(0, 2 ** 32 - 1))
def test_norm_invariants(steps, seed):
    g = periodic_grid(32)
    rng = np.random.default_rng(seed)
    prev = None
    t = 0.0
    for dt in steps:
        t += dt
        rec = norms(SolutionState.from_arrays(g, rng.normal(size=32), rng.normal(size=32), t),
                    previous=prev)
        assert min(rec.sup_u, rec.sup_v, rec.l2_u, rec.l2_v) >= 0
        assert rec.h1_u >= rec.l2_u and rec.h1_v >= rec.l2_v
        if prev is not None:
            assert rec.bkm_integral >= prev.bkm_integral
        prev = rec


def test_grid_is_hashable_and_frozen():
    g = periodic_grid(16)
    assert hash(g) == hash(Grid("periodic", 16, 0.0, 1.0))
