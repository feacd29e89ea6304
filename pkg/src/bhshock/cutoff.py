"""Even compactly supported cutoff used by every corrector profile.

``eta`` equals 1 on [-1, 1], 0 outside [-2, 2], and bridges the gap with a
quintic smoothstep, so it is even, C2 at the seams, and nonincreasing for
x >= 0.  Derivatives up to order 4 are provided piecewise (orders >= 3 jump
at the seams, which every consumer keeps away from).
"""

import numpy as np

INNER_RADIUS = 1.0
OUTER_RADIUS = 2.0

# smoothstep s(u) = 6u^5 - 15u^4 + 10u^3 and derivatives on [0, 1]
_S_COEFFS = [
    np.array([6.0, -15.0, 10.0, 0.0, 0.0, 0.0]),
    np.array([30.0, -60.0, 30.0, 0.0, 0.0]),
    np.array([120.0, -180.0, 60.0, 0.0]),
    np.array([360.0, -360.0, 60.0]),
    np.array([720.0, -360.0]),
]


def _s_deriv(u, m):
    return np.polyval(_S_COEFFS[m], u)


def eta(x):
    """Cutoff value; even, 1 inside the inner radius, 0 outside the outer."""
    return eta_deriv(x, 0)


def eta_deriv(x, m=0):
    """m-th derivative of the cutoff (m <= 4)."""
    x = np.asarray(x, dtype=float)
    r = np.abs(x)
    out = np.zeros_like(r)
    if m == 0:
        out = np.where(r <= INNER_RADIUS, 1.0, out)
    bridge = (r > INNER_RADIUS) & (r < OUTER_RADIUS)
    if np.any(bridge):
        u = r[bridge] - INNER_RADIUS
        vals = (1.0 - _s_deriv(u, 0)) if m == 0 else -_s_deriv(u, m)
        if m % 2 == 1:
            vals = vals * np.sign(x[bridge])
        out[bridge] = vals
    return out if out.ndim else float(out)
