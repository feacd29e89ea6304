"""Corrector profiles carried by solutions near shocks.

The universal singular shape near a shock is ``(2/pi) |x| ln|x|`` under the
cutoff; ``phi(x, b)`` is its offset family, ``g_b`` its one-sided restriction.
``corrector_single`` is the time-dependent corrector for a single shock with
data coefficients (c1, c2); ``corrector_two`` the three-branch corrector for
two shocks sitting at ``x = t`` and ``x = 0`` in the interaction frame; and
``handoff_coeffs`` the coefficients with which the merged profile at
collision re-enters the single-shock data class.

Semi-analytic Hilbert transforms of the correctors are assembled from
``hilbert_gb`` by reflection/translation identities, so no sampled transform
is needed inside the solvers.  For the two-shock corrector the transform
uses the one-sided ``g_{|t|}`` representation, which coincides with the
three-branch formula wherever the cutoff is 1 (transforms of additive
constants are dropped); the mismatch is supported in the cutoff's bridge
zone and is O(|t ln t|) small.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import cutoff
from .errors import AdmissibilityError, DomainError, RegimeError
from .hilbert import B_REGIME_MAX, hilbert_gb_all

TWO_OVER_PI = 2.0 / math.pi


@dataclass(frozen=True)
class CutoffSpec:
    """Even C2 cutoff: 1 inside ``inner_radius``, 0 outside ``outer_radius``."""

    inner_radius: float = 1.0
    outer_radius: float = 2.0

    def __post_init__(self):
        if not 0 < self.inner_radius < self.outer_radius:
            raise ValueError("need 0 < inner_radius < outer_radius")


@dataclass(frozen=True)
class CorrectorCoeffs:
    """Side coefficients of the initial-data corrector."""

    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.c1) and np.isfinite(self.c2)):
            raise ValueError("coefficients must be finite")


@dataclass(frozen=True)
class ShockStrengths:
    """Strengths (positive) and estimated rates for up to two shocks."""

    sigma1: float
    sigma2: float = 0.0
    sigma1_dot: float = 0.0
    sigma2_dot: float = 0.0

    def __post_init__(self):
        if self.sigma1 <= 0 or (self.sigma2 < 0):
            raise AdmissibilityError("shock strengths must be positive")


DEFAULT_CUTOFF = CutoffSpec()


def eta(spec: CutoffSpec, x):
    """Cutoff value for an arbitrary spec (the default matches ``cutoff.eta``)."""
    x = np.asarray(x, dtype=float)
    r = np.abs(x)
    rin, rout = spec.inner_radius, spec.outer_radius
    u = np.clip((r - rin) / (rout - rin), 0.0, 1.0)
    s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    out = 1.0 - s
    return out if out.ndim else float(out)


def _xlogx(z):
    z = np.asarray(z, dtype=float)
    return np.where(z > 0, z * np.log(np.where(z > 0, z, 1.0)), 0.0)


def phi(x, b):
    """Offset singular profile (2 eta(x)/pi) [(|x|+b) ln(|x|+b) - b ln b].

    ``b ln b`` is extended by 0 at b = 0.  ``b`` may be an array
    broadcastable against ``x`` (the solvers evaluate along characteristics
    whose offsets vary with time).
    """
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise DomainError("offset b must be nonnegative")
    x = np.asarray(x, dtype=float)
    out = TWO_OVER_PI * cutoff.eta(x) * (_xlogx(np.abs(x) + b) - _xlogx(b))
    return out if out.ndim else float(out)


def phi_dx(x, b):
    """x-partial of ``phi``; odd in x, log-divergent at 0 when b = 0."""
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise DomainError("offset b must be nonnegative")
    x = np.asarray(x, dtype=float)
    r = np.abs(x)
    z = r + b
    core = _xlogx(z) - _xlogx(b)
    dcore = np.where(z > 0, np.log(np.where(z > 0, z, 1.0)) + 1.0, 0.0)
    mag = cutoff.eta_deriv(r, 1) * core + cutoff.eta(r) * dcore
    out = TWO_OVER_PI * np.sign(x) * mag
    return out if out.ndim else float(out)


def phi_db(x, b):
    """b-partial (2 eta/pi)[ln(|x|+b) - ln b]; singular at b = 0."""
    if b <= 0:
        raise DomainError("phi_db requires b > 0")
    x = np.asarray(x, dtype=float)
    out = TWO_OVER_PI * cutoff.eta(x) * (np.log(np.abs(x) + b) - math.log(b))
    return out if out.ndim else float(out)


def g_b(b, x):
    """One-sided profile: ``phi(x, b)`` for x >= 0, zero for x < 0."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0.0, phi(x, b), 0.0)
    return out if out.ndim else float(out)


def dgb_db(b, x):
    """b-derivative of ``g_b`` for x > 0 (singular-parameter error at b = 0)."""
    if b <= 0:
        raise DomainError("dgb_db is singular at b = 0")
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0.0, TWO_OVER_PI * cutoff.eta(x)
                   * (np.log(np.where(x > 0, x, 1.0) + b) - math.log(b)), 0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# single-shock corrector
# ---------------------------------------------------------------------------

def _offset_single(sigma, t):
    b = 0.5 * sigma * t
    if b < 0:
        raise AdmissibilityError("sigma and t must keep the offset nonnegative")
    if b >= B_REGIME_MAX:
        raise RegimeError(
            f"corrector offset sigma*t/2 = {b:.4g} reached 1/(2e); shrink the horizon")
    return b


def _side_coeff(coeffs: CorrectorCoeffs, x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0.0, coeffs.c1 - 1.0, np.where(x > 0.0, coeffs.c2 - 1.0, 0.0))


def corrector_single(coeffs: CorrectorCoeffs, sigma, sigma_dot, t, x):
    """One-shock corrector at time t: base profile plus offset correction."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = phi(x, 0.0)
    if coeffs.c1 != 1.0 or coeffs.c2 != 1.0:
        b = _offset_single(sigma, t)
        out = out + _side_coeff(coeffs, x) * phi(x, b)
    return float(out[0]) if scalar else out


def corrector_single_dx(coeffs: CorrectorCoeffs, sigma, sigma_dot, t, x):
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = phi_dx(x, 0.0)
    if coeffs.c1 != 1.0 or coeffs.c2 != 1.0:
        b = _offset_single(sigma, t)
        out = out + _side_coeff(coeffs, x) * phi_dx(x, b)
    return float(out[0]) if scalar else out


def corrector_single_dt(coeffs: CorrectorCoeffs, sigma, sigma_dot, t, x):
    """t-partial; chains the offset rate (sigma_dot t + sigma)/2 through phi_db."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if coeffs.c1 == 1.0 and coeffs.c2 == 1.0:
        out = np.zeros_like(x)
        return float(out[0]) if scalar else out
    b = _offset_single(sigma, t)
    if b == 0.0:
        raise DomainError("t-partial undefined at t = 0 for c != 1 data")
    rate = 0.5 * (sigma_dot * t + sigma)
    out = _side_coeff(coeffs, x) * phi_db(x, b) * rate
    return float(out[0]) if scalar else out


def hilbert_corrector_single(coeffs: CorrectorCoeffs, sigma, t, x, order=0):
    """Hilbert transform (and x-derivatives) of the one-shock corrector.

    Assembled from ``H[g_b]`` by evenness: the base profile transforms to
    ``H[g_0](x) - H[g_0](-x)`` and each one-sided offset piece to the
    corresponding reflected ``H[g_b]`` term.
    """
    x = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x)
    hp = hilbert_gb_all(0.0, xs, max_order=order)
    hm = hilbert_gb_all(0.0, -xs, max_order=order)
    sgn = (-1.0) ** order
    out = hp[order] - sgn * hm[order]
    if coeffs.c1 != 1.0 or coeffs.c2 != 1.0:
        b = _offset_single(sigma, t)
        hbp = hilbert_gb_all(b, xs, max_order=order)
        hbm = hilbert_gb_all(b, -xs, max_order=order)
        out = out + (coeffs.c2 - 1.0) * hbp[order] \
            - (coeffs.c1 - 1.0) * sgn * hbm[order]
    return float(out[0]) if x.ndim == 0 else out


# ---------------------------------------------------------------------------
# two-shock corrector (interaction frame, shocks at x = t < 0 and x = 0)
# ---------------------------------------------------------------------------

def _weights(sig: ShockStrengths):
    if sig.sigma1 <= 0 or sig.sigma2 <= 0:
        raise AdmissibilityError("two-shock corrector needs positive strengths")
    lam1 = sig.sigma1 / (sig.sigma1 + 2.0 * sig.sigma2)
    lam2 = sig.sigma2 / (2.0 * sig.sigma1 + sig.sigma2)
    dlam1 = 2.0 * (sig.sigma1_dot * sig.sigma2 - sig.sigma1 * sig.sigma2_dot) \
        / (sig.sigma1 + 2.0 * sig.sigma2) ** 2
    dlam2 = 2.0 * (sig.sigma1 * sig.sigma2_dot - sig.sigma2 * sig.sigma1_dot) \
        / (2.0 * sig.sigma1 + sig.sigma2) ** 2
    return lam1, lam2, dlam1, dlam2


def corrector_two(sig: ShockStrengths, t, x):
    """Three-branch two-shock corrector; vanishes at both shocks."""
    if t >= 0:
        raise DomainError("two-shock corrector is defined for frame time t < 0")
    lam1, lam2, _, _ = _weights(sig)
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p_shift = phi(x - t, 0.0)
    p_here = phi(x, 0.0)
    p_t = phi(t, 0.0)
    left = p_shift + lam2 * (p_here - p_t)
    mid = p_shift + p_here - p_t
    right = lam1 * (p_shift - p_t) + p_here
    out = np.where(x < t, left, np.where(x < 0.0, mid, right))
    return float(out[0]) if scalar else out


def corrector_two_dx(sig: ShockStrengths, t, x):
    if t >= 0:
        raise DomainError("two-shock corrector is defined for frame time t < 0")
    lam1, lam2, _, _ = _weights(sig)
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d_shift = phi_dx(x - t, 0.0)
    d_here = phi_dx(x, 0.0)
    out = np.where(x < t, d_shift + lam2 * d_here,
                   np.where(x < 0.0, d_shift + d_here,
                            lam1 * d_shift + d_here))
    return float(out[0]) if scalar else out


def corrector_two_dt(sig: ShockStrengths, t, x):
    """Frame-time partial; includes the strength-weight rates."""
    if t >= 0:
        raise DomainError("two-shock corrector is defined for frame time t < 0")
    lam1, lam2, dlam1, dlam2 = _weights(sig)
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p_shift = phi(x - t, 0.0)
    p_here = phi(x, 0.0)
    p_t = phi(t, 0.0)
    d_shift = phi_dx(x - t, 0.0)
    dp_t = phi_dx(t, 0.0)
    left = -d_shift + dlam2 * (p_here - p_t) - lam2 * dp_t
    mid = -d_shift - dp_t
    right = dlam1 * (p_shift - p_t) + lam1 * (-d_shift - dp_t)
    out = np.where(x < t, left, np.where(x < 0.0, mid, right))
    return float(out[0]) if scalar else out


def hilbert_corrector_two(sig: ShockStrengths, t, x, order=0):
    """Hilbert transform of the two-shock corrector (near-field exact).

    Uses the representation ``phi0(x-t) + phi0(x) - const`` plus one-sided
    ``g_{|t|}`` pieces; constants transform to zero.
    """
    if t >= 0:
        raise DomainError("two-shock corrector is defined for frame time t < 0")
    lam1, lam2, _, _ = _weights(sig)
    x = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x)
    sgn = (-1.0) ** order
    b = abs(t)

    def h_phi0(z):
        hp = hilbert_gb_all(0.0, z, max_order=order)[order]
        hm = hilbert_gb_all(0.0, -z, max_order=order)[order]
        return hp - sgn * hm

    out = h_phi0(xs - t) + h_phi0(xs)
    hb_refl = hilbert_gb_all(b, t - xs, max_order=order)[order]
    hb_here = hilbert_gb_all(b, xs, max_order=order)[order]
    out = out + (1.0 - lam2) * sgn * hb_refl - (1.0 - lam1) * hb_here
    return float(out[0]) if x.ndim == 0 else out


def handoff_coeffs(sigma1, sigma2) -> CorrectorCoeffs:
    """Coefficients of the merged corrector at collision time.

    Substituting t -> 0- into the two-shock corrector collapses both
    singular profiles onto the origin with side weights 1 + lam2 (left) and
    1 + lam1 (right), i.e. ``2(s1+s2)/(2 s1+s2)`` and ``2(s1+s2)/(s1+2 s2)``.
    Homogeneous of degree zero in the strengths.
    """
    if sigma1 <= 0 or sigma2 <= 0:
        raise AdmissibilityError("handoff needs positive strengths")
    c1 = 2.0 * (sigma1 + sigma2) / (2.0 * sigma1 + sigma2)
    c2 = 2.0 * (sigma1 + sigma2) / (sigma1 + 2.0 * sigma2)
    return CorrectorCoeffs(c1, c2)
