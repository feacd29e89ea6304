"""Analytic initial-data presets used by the harness and the test suites."""

import numpy as np

from .correctors import CorrectorCoeffs, ShockStrengths, corrector_two
from .errors import ConfigError
from .gridfn import PiecewiseRegularFn
from .reference import PiecewiseConstBurgers

DECAY = 0.65


def _one_sided_tail(amplitude, decay):
    """Profile equal to ``amplitude`` at the shock, decaying away from it."""

    def left(x):
        return amplitude * np.exp(decay * np.asarray(x, float))

    return left


def single_shock_data(jump=1.2, m0=2.0, decay=DECAY, half_width=8.0,
                      n_per_piece=700, x_min=1e-6):
    """Single-shock profile with a prescribed jump and punctured-H2 norm.

    The base shape is an exponential step ``(jump/2) sign(-x) e^{-decay|x|}``;
    a continuous odd component ``c x e^{-x^2}`` is added and its amplitude
    solved for so the norm lands exactly on ``m0/2`` (the jump is
    unaffected).  Raises when ``m0`` is too small for the jump.
    """
    amp = 0.5 * jump

    def base(x):
        x = np.asarray(x, float)
        return amp * np.sign(-x) * np.exp(-decay * np.abs(x))

    def extra(x):
        x = np.asarray(x, float)
        return x * np.exp(-(x**2))

    def build(c):
        return PiecewiseRegularFn.from_callables(
            [lambda x: base(x) + c * extra(x),
             lambda x: base(x) + c * extra(x)],
            [0.0], window=(-half_width - 0.5, half_width + 0.5),
            n_per_piece=n_per_piece, grading=x_min)

    f0 = build(0.0)
    n0 = f0.sobolev_norm(2).total
    target = 0.5 * m0
    if n0 > target:
        raise ConfigError(
            f"m0={m0} is below the smallest norm {2 * n0:.3f} reachable for jump={jump}")
    fh = build(1.0)
    # ||base + c h||^2 is quadratic in c; recover the cross term from three norms
    nh_sq = fh.sobolev_norm(2).total ** 2
    cross = 0.5 * (nh_sq - n0**2 - _norm_sq_extra(extra, half_width))
    h_sq = _norm_sq_extra(extra, half_width)
    roots = np.roots([h_sq, 2.0 * cross, n0**2 - target**2])
    roots = roots[np.isreal(roots)].real
    if roots.size == 0:
        raise ConfigError("could not normalize the preset to the requested m0")
    c = roots[np.argmin(np.abs(roots))]
    return build(float(c))


def _norm_sq_extra(extra, half_width):
    xs = np.linspace(-half_width, half_width, 4001)
    v = extra(xs)
    d1 = np.gradient(v, xs)
    d2 = np.gradient(d1, xs)
    return float(np.trapezoid(v**2 + d1**2 + d2**2, xs))


def two_shock_data(jump1=1.0, jump2=1.0, tau0=-0.05, decay=DECAY,
                   half_width=8.0, n_per_piece=520, x_min=1e-6,
                   mid_slope=0.0):
    """Two-shock frame profile: shocks at ``tau0`` and 0 with given jumps.

    The middle band is linear with slope ``mid_slope`` and zero mean, the
    tails decay exponentially; the traces then read ``jump1`` above the
    middle level on the left and ``jump2`` below it on the right.
    """
    if tau0 >= 0:
        raise ConfigError("tau0 must be negative")

    def mid(x):
        x = np.asarray(x, float)
        return mid_slope * (x - 0.5 * tau0)

    m_left = mid_slope * (-0.5 * tau0) * 0 + float(mid(tau0))
    m_right = float(mid(0.0))

    def left(x):
        x = np.asarray(x, float)
        return (m_left + jump1) * np.exp(decay * (x - tau0))

    def right(x):
        x = np.asarray(x, float)
        return (m_right - jump2) * np.exp(-decay * x)

    return PiecewiseRegularFn.from_callables(
        [left, mid, right], [tau0, 0.0],
        window=(-half_width - 0.5, half_width + 0.5),
        n_per_piece=n_per_piece, grading=x_min), ShockStrengths(jump1, jump2)


def burgers_two_shock(u_left=2.0, u_mid=0.0, u_right=-2.0,
                      x1=-1.0, x2=1.0):
    return PiecewiseConstBurgers(u_left, u_mid, u_right, x1, x2)


def interaction_physical_data(jump1=1.0, jump2=1.0, tau0=-0.05,
                              hilbert_scale=1.0, **kwargs):
    """Physical profile with two approaching shocks at ``tau0`` and 0.

    Returns ``(u0, y1, y2)`` where the profile already carries the scaled
    two-shock corrector, so it lies in the class the interaction solver
    ingests.
    """
    w_bar, sig = two_shock_data(jump1, jump2, tau0, **kwargs)

    def u0(x):
        return w_bar(x) + hilbert_scale * corrector_two(sig, tau0, x)

    lo, hi = w_bar.window
    fns = []
    bounds = [lo, tau0, 0.0, hi]
    for i in range(3):
        fns.append(u0)
    u_fn = PiecewiseRegularFn.from_callables(
        fns, [tau0, 0.0], window=w_bar.window, n_per_piece=520, grading=1e-6)
    return u_fn, tau0, 0.0


PRESETS = {
    "single_default": lambda **kw: single_shock_data(**kw),
    "two_symmetric": lambda **kw: two_shock_data(**kw),
    "burgers_202": lambda **kw: burgers_two_shock(**kw),
    "interaction_symmetric": lambda **kw: interaction_physical_data(**kw),
}
