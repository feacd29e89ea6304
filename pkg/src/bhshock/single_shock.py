"""Single-shock solver in the shock-attached frame.

The shock is pinned at the origin and the profile is written as
``u = w + scale * corrector`` with ``w`` in H2 away from 0.  The remaining
component solves a transport equation ``w_t + a w_x = F`` whose speed and
source both depend on ``w``; it is solved by two nested fixed-point loops:

* the outer loop freezes the transport speed at the previous profile;
* the inner loop freezes the source and integrates the resulting linear
  problem along characteristics of the frozen speed, which for entropic
  data flow away from the shock backward in time.

Characteristic feet and the accumulated source live on a fixed space grid
clustered geometrically at the shock and a time grid graded toward t = 0.
Both loops report difference norms and measured contraction ratios;
a-priori trace-drift and norm-cap monitors guard the regime the scheme is
valid in.

When the requested horizon exceeds the safe single-solve horizon and the
data carry unit corrector coefficients, the march is chunked: the final
profile of one chunk is well-prepared data for the next (the corrector is
time-independent in that case).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .correctors import (
    CorrectorCoeffs,
    corrector_single,
    corrector_single_dt,
    corrector_single_dx,
    hilbert_corrector_single,
    phi,
    phi_dx,
)
from .errors import AdmissibilityError, DomainError, NonconvergenceError, RegimeError
from .gridfn import PiecewiseRegularFn
from .hilbert import B_REGIME_MAX, hilbert_piecewise

TRACE_SEED = 1e-12


# ---------------------------------------------------------------------------
# constants and reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverConstants:
    """Numerical and regime constants for one solve.

    ``M0`` caps the punctured H2 norm and ``delta0`` is one sixth of the
    data jump; both are derived from the data when left at None.  ``T``
    defaults to half the smallest structural horizon bound.
    """

    M0: float = None
    delta0: float = None
    T: float = None
    n_space: int = 1024
    x_min: float = 2e-3
    half_width: float = 8.0
    t_min_frac: float = 1e-4
    t_ratio: float = 0.8
    tol_inner: float = 1e-6
    tol_outer: float = 1e-5
    max_inner: int = 30
    max_outer: int = 15
    hilbert_scale: float = 1.0
    y0: float = 0.0
    monitor_slack: float = 1.02

    @property
    def delta1(self):
        """Radius where the near-shock speed sign structure is guaranteed."""
        if self.delta0 is None or self.M0 is None:
            return None
        return min(1.0 / 16.0,
                   0.25 * (self.delta0 / (4.0 + 2.0 + self.M0)) ** 2)

    def default_horizon(self):
        caps = [B_REGIME_MAX, 1.0 / (4.0 * math.e * self.M0)]
        if self.delta1 is not None and self.delta0 > 0:
            caps.append(self.delta1 / (10.0 * self.delta0))
        return 0.5 * min(caps)

    def chunk_horizon(self):
        # the sign-structure radius bound is monitored at runtime instead of
        # limiting the marching span, which it would make impractically short
        return 0.5 * min(B_REGIME_MAX, 1.0 / (4.0 * math.e * self.M0))


def constants_from_data(w_bar: PiecewiseRegularFn, overrides: SolverConstants = None):
    """Normalize regime constants from the data.

    ``delta0`` is jump/6 and ``M0`` twice the punctured H2 norm; a supplied
    ``M0`` is kept when it dominates the derived one, otherwise lifted.
    """
    base = overrides if overrides is not None else SolverConstants()
    jump = w_bar.jump(w_bar.breakpoints[0])
    if jump <= 0:
        raise AdmissibilityError("data jump must be positive (entropic shock)")
    norm = w_bar.sobolev_norm(2).total
    m0 = 2.0 * norm
    if base.M0 is not None:
        m0 = max(m0, base.M0)
    out = replace(base, M0=m0, delta0=jump / 6.0)
    if out.T is None:
        out = replace(out, T=out.default_horizon())
    return out


@dataclass
class IterationReport:
    """Difference norms and contraction diagnostics for the nested loops."""

    inner_norm_history: list = field(default_factory=list)
    inner_diff_history: list = field(default_factory=list)
    trace_rate_history: list = field(default_factory=list)
    outer_diff_history: list = field(default_factory=list)
    inner_iterations: list = field(default_factory=list)
    converged: bool = False
    monitors: dict = field(default_factory=dict)
    tol_abs: float = 0.0

    def _ratios(self, seq):
        # pairs within a few multiples of the stopping tolerance sit at the
        # quadrature-noise floor and carry no contraction information
        floor = 3.0 * self.tol_abs
        return [b / a for a, b in zip(seq[:-1], seq[1:]) if a > floor]

    def inner_contraction_ratio(self):
        """Worst measured ratio of successive inner difference norms."""
        worst = 0.0
        for stage in self.inner_diff_history:
            rs = self._ratios(stage)
            if rs:
                worst = max(worst, max(rs))
        return worst

    def outer_contraction_ratio(self):
        worst = 0.0
        for stage in self.outer_diff_history:
            rs = self._ratios(stage)
            if rs:
                worst = max(worst, max(rs))
        return worst

    def contraction_ratios(self):
        return {"inner": self.inner_contraction_ratio(),
                "outer": self.outer_contraction_ratio()}


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

def shock_grid(constants: SolverConstants):
    half = np.geomspace(constants.x_min, constants.half_width,
                        constants.n_space // 2)
    return np.concatenate([-half[::-1], half])


def graded_times(T, min_frac=1e-4, ratio=0.8):
    """Increasing times on [0, T], steps growing geometrically away from 0."""
    steps = [min_frac * T]
    total = steps[0]
    while total < T:
        steps.append(steps[-1] / ratio)
        total += steps[-1]
    t = np.concatenate(([0.0], np.cumsum(steps)))
    return t * (T / t[-1])


def _piecewise_level(x_grid, values, wm, wp, half_width):
    # window margin keeps edge-jump logarithms finite at the outermost nodes
    nh = x_grid.size // 2
    pad = half_width + 0.5
    return PiecewiseRegularFn(
        [(x_grid[:nh], values[:nh]), (x_grid[nh:], values[nh:])],
        [0.0], (-pad, pad),
        traces={"left_value": [wm], "right_value": [wp]})


# ---------------------------------------------------------------------------
# speed fields and characteristics
# ---------------------------------------------------------------------------

def speed_single(w_fn: PiecewiseRegularFn, coeffs: CorrectorCoeffs, sigma,
                 t, x, scale=1.0):
    """Transport speed ``w + scale*corrector - (w- + w+)/2`` away from 0."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x == 0.0):
        raise DomainError("transport speed is undefined at the shock")
    avg = 0.5 * (w_fn.trace(0.0, "left") + w_fn.trace(0.0, "right"))
    corr = corrector_single(coeffs, sigma, 0.0, t, x)
    out = w_fn(x) + scale * corr - avg
    return float(out[0]) if scalar else out


class FrozenSpeed:
    """Speed field of a frozen trajectory, linear in t between levels."""

    def __init__(self, times, w_fns, trace_m, trace_p, coeffs, scale, x_grid):
        self.times = np.asarray(times, float)
        self.w_fns = list(w_fns)
        self.trace_m = np.asarray(trace_m, float)
        self.trace_p = np.asarray(trace_p, float)
        self.coeffs = coeffs
        self.scale = scale
        self.x_grid = x_grid
        self.unit = coeffs.c1 == 1.0 and coeffs.c2 == 1.0
        self._base = None

    def _corr(self, tv, sigma, x):
        if self.unit:
            return phi(x, 0.0)
        b = 0.5 * np.maximum(sigma, 0.0) * tv
        kappa = np.where(x < 0, self.coeffs.c1 - 1.0,
                         np.where(x > 0, self.coeffs.c2 - 1.0, 0.0))
        return phi(x, 0.0) + kappa * phi(x, b)

    def interval_eval(self, j, tv, x):
        """Speed at per-node times inside level interval [t_j, t_{j+1}]."""
        t0, t1 = self.times[j], self.times[j + 1]
        th = np.clip((tv - t0) / (t1 - t0), 0.0, 1.0)
        w = (1.0 - th) * self.w_fns[j](x) + th * self.w_fns[j + 1](x)
        wm = (1.0 - th) * self.trace_m[j] + th * self.trace_m[j + 1]
        wp = (1.0 - th) * self.trace_p[j] + th * self.trace_p[j + 1]
        return w + self.scale * self._corr(tv, wm - wp, x) - 0.5 * (wm + wp)

    def __call__(self, t, x):
        t = float(np.clip(t, self.times[0], self.times[-1]))
        j = int(np.searchsorted(self.times, t, side="right") - 1)
        j = min(max(j, 0), len(self.times) - 2)
        x = np.atleast_1d(np.asarray(x, float))
        out = self.interval_eval(j, np.full(x.shape, t), x)
        return out

    def max_speed(self):
        out = 0.0
        for j in (0, len(self.times) - 1):
            out = max(out, float(np.max(np.abs(self(self.times[j], self.x_grid)))))
        return max(out, 1e-6)


def integrate_characteristic(speed, t0, x0, times, x_floor=1e-4,
                             max_halvings=40, a_max=None, region_check=None):
    """Backward characteristics of ``speed`` through (t0, x0).

    ``times`` is the increasing level grid; integration runs from t0 down
    to times[0] with per-node RK4 substeps capped near the shock (the
    field is only log-Lipschitz there).  A step that would cross the shock
    is rejected and halved.  ``speed`` is either a vectorized callable
    ``a(t_vec, x_vec)`` or an object with ``interval_eval(j, t_vec, x_vec)``.
    Returns positions at every level time <= t0, shape (levels, targets).
    """
    times = np.asarray(times, float)
    j0 = int(round(np.searchsorted(times, t0 + 1e-15) - 1))
    x = np.atleast_1d(np.asarray(x0, float)).copy()
    out = np.empty((j0 + 1, x.size))
    out[j0] = x

    if hasattr(speed, "interval_eval"):
        evals = speed.interval_eval
    else:
        evals = lambda j, tv, xv: speed(tv, xv)
    if a_max is None:
        probe = np.where(x == 0.0, x_floor, x)
        a_max = max(float(np.max(np.abs(evals(max(j0 - 1, 0),
                                              np.full(x.shape, t0), probe)))), 0.5)

    for j in range(j0, 0, -1):
        t_hi, t_lo = times[j], times[j - 1]
        remaining = np.full(x.size, t_hi - t_lo)
        t_now = np.full(x.size, t_hi)
        guard = 0
        while np.any(remaining > 1e-16):
            guard += 1
            if guard > 100000:
                raise NonconvergenceError("characteristic substepping stalled")
            active = np.flatnonzero(remaining > 1e-16)
            xa = x[active]
            ta = t_now[active]
            dt = np.minimum(remaining[active],
                            np.maximum(np.abs(xa), x_floor) / (10.0 * a_max))
            for _ in range(max_halvings):
                k1 = evals(j - 1, ta, xa)
                k2 = evals(j - 1, ta - 0.5 * dt, xa - 0.5 * dt * k1)
                k3 = evals(j - 1, ta - 0.5 * dt, xa - 0.5 * dt * k2)
                k4 = evals(j - 1, ta - dt, xa - dt * k3)
                x_new = xa - dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                crossed = np.sign(x_new) != np.sign(xa)
                if region_check is not None:
                    crossed = crossed | region_check(ta - dt, x_new, active)
                if not np.any(crossed):
                    break
                dt = np.where(crossed, 0.5 * dt, dt)
            else:
                raise NonconvergenceError(
                    "characteristic step kept violating its region")
            x[active] = x_new
            t_now[active] = ta - dt
            remaining[active] = remaining[active] - dt
        out[j - 1] = x
    return out


# ---------------------------------------------------------------------------
# source assembly
# ---------------------------------------------------------------------------

def assemble_F_single(w_fn: PiecewiseRegularFn, coeffs: CorrectorCoeffs,
                      sigma, sigma_dot, t, x, scale=1.0, with_parts=False,
                      hphi=None):
    """Source term of the transport equation at one time level.

    ``scale`` multiplies the nonlocal operator; the corrector scales with
    it, which is what keeps the logarithms cancelling at the shock.
    Optionally returns the three-part split (A: corrector
    self-interaction, B: profile transform minus base-slope transport,
    C: offset-profile terms, with F = A + B - C).
    """
    x = np.asarray(x, dtype=float)
    th = scale
    if th == 0.0 and not with_parts:
        return np.zeros_like(x)
    hw = hilbert_piecewise(w_fn, x)
    if hphi is None:
        hphi = hilbert_corrector_single(coeffs, sigma, t, x)
    corr = corrector_single(coeffs, sigma, sigma_dot, t, x)
    corr_dx = corrector_single_dx(coeffs, sigma, sigma_dot, t, x)
    if (coeffs.c1 == 1.0 and coeffs.c2 == 1.0) or t == 0.0:
        corr_dt = np.zeros_like(x)
    else:
        corr_dt = corrector_single_dt(coeffs, sigma, sigma_dot, t, x)
    avg_term = w_fn(x) - 0.5 * (w_fn.trace(0.0, "left") + w_fn.trace(0.0, "right"))
    F = (th * hw + th**2 * hphi - th**2 * corr * corr_dx
         - th * corr_dt - th * avg_term * corr_dx)
    if not with_parts:
        return F
    base_dx = phi_dx(x, 0.0)
    parts = {
        "A": th**2 * (hphi - corr * corr_dx),
        "B": th * (hw - avg_term * base_dx),
        "C": th * (corr_dt + avg_term * (corr_dx - base_dx)),
    }
    return F, parts


class _SourceCache:
    """Per-solve cache of corrector arrays on the fixed grid."""

    def __init__(self, coeffs, x_grid, scale):
        self.coeffs = coeffs
        self.x_grid = x_grid
        self.scale = scale
        self.unit = coeffs.c1 == 1.0 and coeffs.c2 == 1.0
        self.base = phi(x_grid, 0.0)
        self.base_dx = phi_dx(x_grid, 0.0)
        self.kappa = np.where(x_grid < 0, coeffs.c1 - 1.0, coeffs.c2 - 1.0)
        self.hphi0 = None  # filled lazily (transform of the base corrector)

    def hphi_base(self):
        if self.hphi0 is None:
            unit_co = CorrectorCoeffs(1.0, 1.0)
            self.hphi0 = hilbert_corrector_single(unit_co, 1.0, 0.0, self.x_grid)
        return self.hphi0

    def source_level(self, w_fn, w_vals, wm, wp, sigma, rate, t):
        th = self.scale
        x = self.x_grid
        if th == 0.0:
            return np.zeros_like(x)
        hw = hilbert_piecewise(w_fn, x, n_gl=8, n_panels=12, deriv_table=True)
        if self.unit:
            hphi = self.hphi_base()
            corr = self.base
            corr_dx = self.base_dx
            corr_dt = 0.0
        else:
            hphi = hilbert_corrector_single(self.coeffs, sigma, t, x)
            b = 0.5 * sigma * t
            corr = self.base + self.kappa * phi(x, b)
            corr_dx = self.base_dx + self.kappa * phi_dx(x, b)
            if t == 0.0:
                corr_dt = 0.0
            else:
                corr_dt = corrector_single_dt(self.coeffs, sigma, rate, t, x)
        avg_term = w_vals - 0.5 * (wm + wp)
        return (th * hw + th**2 * hphi - th**2 * corr * corr_dx
                - th * corr_dt - th * avg_term * corr_dx)


# ---------------------------------------------------------------------------
# trajectory container
# ---------------------------------------------------------------------------

@dataclass
class SingleShockTrajectory:
    """Profiles, traces and shock path of one solved run."""

    times: np.ndarray
    x_grid: np.ndarray
    w: np.ndarray          # (levels, nodes)
    trace_m: np.ndarray
    trace_p: np.ndarray
    sigma_dot: np.ndarray
    coeffs: CorrectorCoeffs
    constants: SolverConstants
    report: IterationReport
    y_phys: np.ndarray = None

    def __post_init__(self):
        if self.y_phys is None:
            self.y_phys = recover_shock_position(self)

    @property
    def sigma(self):
        return self.trace_m - self.trace_p

    def w_fn(self, j) -> PiecewiseRegularFn:
        return _piecewise_level(self.x_grid, self.w[j], self.trace_m[j],
                                self.trace_p[j], self.constants.half_width)

    def corrector_values(self, j, x=None):
        x = self.x_grid if x is None else np.asarray(x, float)
        return self.constants.hilbert_scale * corrector_single(
            self.coeffs, self.sigma[j], self.sigma_dot[j], self.times[j], x)

    def u_values(self, j, x=None):
        x = self.x_grid if x is None else np.asarray(x, float)
        return self.w_fn(j)(x) + self.corrector_values(j, x)

    def u_traces(self, j):
        """One-sided limits of u at the shock (the corrector vanishes there)."""
        return float(self.trace_m[j]), float(self.trace_p[j])

    def u_physical(self, j, xi):
        """Physical-frame profile at level j sampled at absolute positions."""
        x = np.asarray(xi, float) - self.y_phys[j]
        out = np.where(x == 0.0, np.nan, 0.0)
        safe = np.where(x == 0.0, self.constants.x_min, x)
        return np.where(np.isnan(out), 0.5 * (self.trace_m[j] + self.trace_p[j]),
                        self.u_values(j, safe))


def recover_shock_position(traj: SingleShockTrajectory):
    """Shock path from the trace averages by trapezoid."""
    avg = 0.5 * (traj.trace_m + traj.trace_p)
    dt = np.diff(traj.times)
    y = np.concatenate(([0.0], np.cumsum(0.5 * (avg[1:] + avg[:-1]) * dt)))
    return traj.constants.y0 + y


# ---------------------------------------------------------------------------
# nested iteration
# ---------------------------------------------------------------------------

def _backward_rates(times, vals):
    out = np.zeros_like(vals)
    if len(vals) > 1:
        out[1:] = np.diff(vals) / np.diff(times)
        out[0] = out[1]
    return out


def _clamp_rates(times, rates, m0):
    env = 4.0 * (1.0 + m0) * np.maximum(
        1.0, np.abs(np.log(np.maximum(times, 1e-300))))
    if len(env) > 1:
        env[0] = env[1]
    return np.clip(rates, -env, env)


def _interp_side(x_grid, values, x):
    """Per-side linear interpolation that never blends across the shock."""
    nh = int(np.searchsorted(x_grid, 0.0))
    out = np.empty_like(x)
    neg = x < 0
    out[neg] = np.interp(x[neg], x_grid[:nh], values[:nh])
    out[~neg] = np.interp(x[~neg], x_grid[nh:], values[nh:])
    return out


def _source_grid(x_grid, x_min, n_pad=8):
    """Evaluation grid for the source: the solver grid plus sub-``x_min``
    nodes, so characteristics emerging from the shock see a resolved field
    instead of a clamped one."""
    pad = np.geomspace(x_min / 128.0, x_min, n_pad, endpoint=False)
    return np.sort(np.concatenate([x_grid, pad, -pad]))


def _values_with_traces(x_grid, values, wm, wp, x):
    """Profile values at ``x`` interpolated per side through the traces."""
    nh = x_grid.size // 2
    out = np.empty_like(x)
    neg = x < 0
    xs_l = np.concatenate([x_grid[:nh], [0.0]])
    vs_l = np.concatenate([values[:nh], [wm]])
    xs_r = np.concatenate([[0.0], x_grid[nh:]])
    vs_r = np.concatenate([[wp], values[nh:]])
    out[neg] = np.interp(x[neg], xs_l, vs_l)
    out[~neg] = np.interp(x[~neg], xs_r, vs_r)
    return out


def _side_data_values(w_bar, feet):
    """Data at characteristic feet, evaluated on the matching side."""
    vals = np.empty_like(feet)
    neg = feet < 0
    lo, hi = w_bar.window
    clipped = np.clip(feet, lo, hi)
    vals[neg] = w_bar(np.minimum(clipped[neg], -1e-12))
    vals[~neg] = w_bar(np.maximum(clipped[~neg], 1e-12))
    return vals


def inner_picard_solve(w_bar: PiecewiseRegularFn, coeffs: CorrectorCoeffs,
                       constants: SolverConstants, times, x_grid, paths,
                       report: IterationReport, source_fn=None):
    """Fixed point of the frozen-speed problem by source iteration.

    ``paths`` holds backward characteristics of the frozen speed for every
    level.  Each pass assembles the source from the current iterate and
    rebuilds the profile from the data at the feet plus the accumulated
    source along the paths, stopping when the sup-in-time punctured-H2
    difference drops below tolerance.  ``source_fn(t, x)`` overrides the
    source assembly (tests freeze trivial sources with it).

    Returns the profile arrays, traces and clamped strength rates.
    """
    n_t = times.size
    n_x = x_grid.size
    w_bar_m = w_bar.trace(0.0, "left")
    w_bar_p = w_bar.trace(0.0, "right")
    W = np.tile(w_bar(x_grid), (n_t, 1))
    Tm = np.full(n_t, w_bar_m)
    Tp = np.full(n_t, w_bar_p)
    feet_vals = [None] * n_t
    for j0 in range(1, n_t):
        vals = _side_data_values(w_bar, paths[j0][0])
        feet_vals[j0] = vals
    unit = coeffs.c1 == 1.0 and coeffs.c2 == 1.0
    src_grid = _source_grid(x_grid, constants.x_min)
    cache = _SourceCache(coeffs, src_grid, constants.hilbert_scale)

    diffs, alphas, norms = [], [], []
    scale_ref = max(1.0, constants.M0)
    report.tol_abs = constants.tol_inner * scale_ref
    fns = [_piecewise_level(x_grid, W[j], Tm[j], Tp[j], constants.half_width)
           for j in range(n_t)]
    for k in range(constants.max_inner):
        sigma = Tm - Tp
        if np.any(sigma <= 0):
            raise AdmissibilityError("shock strength lost positivity")
        rates = _clamp_rates(times, _backward_rates(times, sigma), constants.M0)
        F = np.empty((n_t, src_grid.size))
        start = 0 if (unit or source_fn is not None) else 1
        for j in range(start, n_t):
            if source_fn is not None:
                F[j] = source_fn(times[j], src_grid)
                continue
            w_vals = _values_with_traces(x_grid, W[j], Tm[j], Tp[j], src_grid)
            F[j] = cache.source_level(fns[j], w_vals, Tm[j], Tp[j], sigma[j],
                                      rates[j], times[j])
        if start == 1:
            F[0] = F[1]

        W_new = np.empty_like(W)
        Tm_new = np.empty(n_t)
        Tp_new = np.empty(n_t)
        W_new[0] = W[0]
        Tm_new[0], Tp_new[0] = w_bar_m, w_bar_p
        for j0 in range(1, n_t):
            path = paths[j0]
            f_along = np.empty((j0 + 1, n_x + 2))
            for j in range(j0 + 1):
                f_along[j] = _interp_side(src_grid, F[j], path[j])
            acc = np.trapezoid(f_along, times[:j0 + 1], axis=0)
            vals = feet_vals[j0] + acc
            W_new[j0] = vals[:n_x]
            Tm_new[j0] = vals[n_x]
            Tp_new[j0] = vals[n_x + 1]

        beta = 0.0
        sup_norm = 0.0
        fns_new = [None] * n_t
        for j in range(n_t):
            z_fn = _piecewise_level(x_grid, W_new[j] - W[j],
                                    Tm_new[j] - Tm[j], Tp_new[j] - Tp[j],
                                    constants.half_width)
            beta = max(beta, z_fn.sobolev_norm(2).total)
            fns_new[j] = _piecewise_level(x_grid, W_new[j], Tm_new[j],
                                          Tp_new[j], constants.half_width)
            sup_norm = max(sup_norm, fns_new[j].sobolev_norm(2).total)
        fns = fns_new
        sig_z = (Tm_new - Tp_new) - (Tm - Tp)
        alpha = float(np.max(np.abs(_backward_rates(times, sig_z))))
        diffs.append(beta)
        alphas.append(alpha)
        norms.append(sup_norm)
        W, Tm, Tp = W_new, Tm_new, Tp_new

        slack = constants.monitor_slack
        drift = max(np.max(np.abs(Tm - w_bar_m)), np.max(np.abs(Tp - w_bar_p)))
        if drift > slack * constants.delta0:
            raise RegimeError(
                f"trace drift {drift:.3g} exceeded delta0 {constants.delta0:.3g};"
                " shrink the horizon")
        if sup_norm > slack * constants.M0:
            raise RegimeError(
                f"H2 norm {sup_norm:.3g} exceeded the cap M0 {constants.M0:.3g};"
                " shrink the horizon")

        if beta < constants.tol_inner * scale_ref:
            report.inner_diff_history.append(diffs)
            report.trace_rate_history.append(alphas)
            report.inner_norm_history.append(norms)
            report.inner_iterations.append(k + 1)
            sigma = Tm - Tp
            final_rates = _clamp_rates(times, _backward_rates(times, sigma),
                                       constants.M0)
            return W, Tm, Tp, final_rates
    report.inner_diff_history.append(diffs)
    report.trace_rate_history.append(alphas)
    report.inner_norm_history.append(norms)
    raise NonconvergenceError("inner source iteration hit its cap", report)


def outer_solve(w_bar: PiecewiseRegularFn, coeffs: CorrectorCoeffs,
                constants: SolverConstants = None):
    """Solve one horizon by the nested iteration; returns the trajectory.

    The outer loop freezes the transport speed at the previous trajectory
    and measures sup-in-time punctured-H1 differences; they must contract.
    """
    constants = constants_from_data(w_bar, constants)
    times = graded_times(constants.T, constants.t_min_frac, constants.t_ratio)
    x_grid = shock_grid(constants)
    targets = np.concatenate([x_grid, [-TRACE_SEED, TRACE_SEED]])
    report = IterationReport()

    n_t = times.size
    W = np.tile(w_bar(x_grid), (n_t, 1))
    Tm = np.full(n_t, w_bar.trace(0.0, "left"))
    Tp = np.full(n_t, w_bar.trace(0.0, "right"))
    rates = np.zeros(n_t)
    outer_diffs = []

    for n in range(constants.max_outer):
        w_fns = [_piecewise_level(x_grid, W[j], Tm[j], Tp[j],
                                  constants.half_width) for j in range(n_t)]
        speed = FrozenSpeed(times, w_fns, Tm, Tp, coeffs,
                            constants.hilbert_scale, x_grid)
        a_max = speed.max_speed()
        paths = [None] * n_t
        for j0 in range(1, n_t):
            paths[j0] = integrate_characteristic(
                speed, times[j0], targets, times,
                x_floor=constants.x_min, a_max=a_max)
        W_new, Tm_new, Tp_new, rates = inner_picard_solve(
            w_bar, coeffs, constants, times, x_grid, paths, report)
        diff = 0.0
        for j in range(n_t):
            z_fn = _piecewise_level(x_grid, W_new[j] - W[j], Tm_new[j] - Tm[j],
                                    Tp_new[j] - Tp[j], constants.half_width)
            diff = max(diff, z_fn.sobolev_norm(1).total)
        outer_diffs.append(diff)
        W, Tm, Tp = W_new, Tm_new, Tp_new
        if diff < constants.tol_outer * max(1.0, constants.M0):
            report.converged = True
            break
    else:
        report.outer_diff_history.append(outer_diffs)
        raise NonconvergenceError("outer speed iteration hit its cap", report)
    report.outer_diff_history.append(outer_diffs)

    return SingleShockTrajectory(times, x_grid, W, Tm, Tp, rates, coeffs,
                                 constants, report)


def solve_single_shock(w_bar: PiecewiseRegularFn, coeffs: CorrectorCoeffs,
                       constants: SolverConstants = None):
    """Solve up to the requested horizon, chunking when it is long.

    For unit coefficients the corrector is time-independent, so the final
    profile of a chunk is again well-prepared data and the march restarts
    cleanly; non-unit coefficients are solved in a single span.
    """
    constants = constants_from_data(w_bar, constants)
    chunk = constants.chunk_horizon()
    if (coeffs.c1 != 1.0 or coeffs.c2 != 1.0) or constants.T <= chunk:
        return outer_solve(w_bar, coeffs, constants)
    n_chunks = int(math.ceil(constants.T / chunk))
    span = constants.T / n_chunks
    pieces = []
    data = w_bar
    y0 = constants.y0
    for _ in range(n_chunks):
        cc = replace(constants, T=span, M0=None, delta0=None, y0=y0)
        traj = outer_solve(data, coeffs, cc)
        pieces.append(traj)
        data = traj.w_fn(traj.times.size - 1)
        y0 = float(traj.y_phys[-1])
    return _stitch_chunks(pieces, coeffs, constants)


def _stitch_chunks(pieces, coeffs, constants):
    times = [pieces[0].times]
    for traj in pieces[1:]:
        times.append(traj.times[1:] + times[-1][-1])
    times = np.concatenate(times)
    w = np.concatenate([pieces[0].w] + [p.w[1:] for p in pieces[1:]])
    tm = np.concatenate([pieces[0].trace_m] + [p.trace_m[1:] for p in pieces[1:]])
    tp = np.concatenate([pieces[0].trace_p] + [p.trace_p[1:] for p in pieces[1:]])
    rates = np.concatenate([pieces[0].sigma_dot]
                           + [p.sigma_dot[1:] for p in pieces[1:]])
    y = np.concatenate([pieces[0].y_phys] + [p.y_phys[1:] for p in pieces[1:]])
    report = IterationReport(
        inner_norm_history=sum((p.report.inner_norm_history for p in pieces), []),
        inner_diff_history=sum((p.report.inner_diff_history for p in pieces), []),
        trace_rate_history=sum((p.report.trace_rate_history for p in pieces), []),
        outer_diff_history=sum((p.report.outer_diff_history for p in pieces), []),
        inner_iterations=sum((p.report.inner_iterations for p in pieces), []),
        converged=all(p.report.converged for p in pieces),
        monitors={"chunks": len(pieces)})
    merged = replace(constants, M0=pieces[0].constants.M0,
                     delta0=pieces[0].constants.delta0)
    return SingleShockTrajectory(times, pieces[0].x_grid, w, tm, tp, rates,
                                 coeffs, merged, report, y_phys=y)
