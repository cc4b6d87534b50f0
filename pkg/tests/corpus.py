"""Shared smooth test functions and weights for the Hilbert identity checks."""
import numpy as np

from nonlocal_blowup.config import ic1_bump
from nonlocal_blowup.grid import Field, line_grid, periodic_grid
from nonlocal_blowup.hilbert import TestWeight

LINE_SUPPORT = (0.3, 0.7)


def bump(x, a, b):
    s = (2.0 * x - a - b) / (b - a)
    out = np.zeros_like(x)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def random_line_field(rng, n=2048, support=LINE_SUPPORT):
    g = line_grid(n, support)
    x = g.points
    a, b = support
    centre = rng.uniform(a + 0.1 * (b - a), b - 0.1 * (b - a))
    width = rng.uniform(0.1, 0.4) * (b - a)
    shape = 1.0 + rng.uniform(-0.5, 0.5) * np.sin(rng.uniform(5, 25) * x + rng.uniform(0, 6))
    f = bump(x, max(a, centre - width), min(b, centre + width)) * shape
    return Field(g, f, compact=True)


def random_periodic_field(rng, n=2048, period=1.0, modes=8):
    g = periodic_grid(n, period)
    k = 2.0 * np.pi / period * np.arange(1, modes + 1)
    decay = np.exp(-0.5 * np.arange(1, modes + 1))
    x = g.points
    f = rng.normal() + sum(d * (rng.normal() * np.cos(kk * x) + rng.normal() * np.sin(kk * x))
                           for kk, d in zip(k, decay))
    return Field(g, f)


def line_weights(support=LINE_SUPPORT):
    a, b = support
    return [
        TestWeight.shifted_linear(a),
        TestWeight.reflected_linear(b),
        TestWeight.lipschitz(lambda x: np.sin(3 * x) + 0.5 * x, 3.5,
                             derivative=lambda x: 3 * np.cos(3 * x) + 0.5,
                             description="sin(3x) + x/2"),
    ]


def periodic_weights(period=1.0):
    w = 2.0 * np.pi / period
    return [
        TestWeight.periodic_lipschitz(lambda x: np.sin(w * x), w, period,
                                      derivative=lambda x: w * np.cos(w * x),
                                      description="sin"),
        TestWeight.periodic_lipschitz(lambda x: np.cos(2 * w * x) + 0.3 * np.sin(w * x),
                                      2.3 * w, period, description="cos + sin"),
        TestWeight.periodic_lipschitz(lambda x: np.exp(np.sin(w * x)), np.e * w, period,
                                      derivative=lambda x: w * np.cos(w * x) * np.exp(np.sin(w * x)),
                                      description="exp(sin)"),
    ]


def identity_scale(f, phi):
    """Natural size of the bilinear form: Lip(phi) (int |f|)^2 / 2pi."""
    return phi.lipschitz_constant * f.grid.integrate(np.abs(f.values)) ** 2 / (2 * np.pi)


def ic1_squared(n=2048):
    g = line_grid(n, (0.45, 0.55))
    return Field(g, ic1_bump(g.points) ** 2, compact=True)


# compact-support data with a positive blow-up functional, for the alpha=2 system
BLOWUP_DATA = [
    # (support, bump centre, bump half-width, v0 expression in x)
    ((0.40, 0.60), 0.50, 0.08, lambda x: np.ones_like(x)),
    ((0.40, 0.60), 0.47, 0.06, lambda x: 0.5 + 2.0 * (x - 0.4)),
    ((0.35, 0.65), 0.52, 0.12, lambda x: 0.8 + 0.3 * np.sin(8 * x)),
    ((0.45, 0.55), 0.50, 0.05, lambda x: np.exp(x) - 1.0),
    ((0.40, 0.60), 0.53, 0.07, lambda x: 2.0 * (x - 0.4)),
]


def blowup_state(index, n=2048):
    from nonlocal_blowup.grid import SolutionState

    support, centre, half, v0 = BLOWUP_DATA[index]
    g = line_grid(n, support)
    x = g.points
    u = bump(x, centre - half, centre + half)
    return SolutionState.from_arrays(g, u, v0(x), compact=True)


def decay_state(n=4096, amplitude=0.1, delta=0.01):
    from nonlocal_blowup.grid import SolutionState

    a, b = 0.5 - delta / 2, 0.5 + delta / 2
    g = periodic_grid(n, support=(a, b))
    x = g.points
    return SolutionState.from_arrays(g, amplitude * bump(x, a, b),
                                     -4.0 - 0.2 * np.cos(2 * np.pi * x), compact=True)


# nonnegative CLM data with a double zero at c, where H u0 > 0; the exact
# solution 4 u0 / ((2 - t H u0)^2 + t^2 u0^2) blows up first at t = 2 / H u0(c)
CLM_DATA = [
    # (support, zero c, amplitude)
    ((0.40, 0.60), 0.55, 80.0),
    ((0.40, 0.60), 0.57, 40.0),
    ((0.30, 0.70), 0.60, 40.0),
]


def clm_state(index, n=4096):
    from nonlocal_blowup.grid import SolutionState

    (a, b), c, amp = CLM_DATA[index]
    w = b - a
    g = line_grid(n, (a, b), (a - 0.1 * w, b + 0.1 * w))
    x = g.points
    u = amp * bump(x, a, b) * ((x - c) / w) ** 2
    return SolutionState.from_arrays(g, u, np.zeros(n), compact=True), c
