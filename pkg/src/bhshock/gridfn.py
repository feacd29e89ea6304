"""Sampled function representations with jump discontinuities.

Two containers are provided.  ``GridFn1D`` is a plain sampled function on a
window, treated as zero outside, used mainly as input to the principal-value
Hilbert oracle.  ``PiecewiseRegularFn`` represents a function that is smooth
on the complement of finitely many breakpoints, carrying one-sided traces of
value and first derivative at each breakpoint; this is the container for the
solvers' profiles.

Each smooth piece is interpolated by a cubic spline (not-a-knot ends where
enough nodes exist).  Traces are stored explicitly rather than re-derived so
jump data survives resampling.  Sobolev norms up to order 2 are computed from
the per-piece splines; the second derivative of a cubic spline is piecewise
linear, so order-2 norms are first-order accurate.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, make_interp_spline

from .errors import DomainError
from .quadrature import leggauss

LEFT = "left"
RIGHT = "right"


def _build_spline(nodes, values):
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.ndim != 1 or nodes.shape != values.shape:
        raise ValueError("nodes and values must be matching 1-D arrays")
    if nodes.size >= 4:
        return CubicSpline(nodes, values, bc_type="not-a-knot")
    if nodes.size == 3:
        return make_interp_spline(nodes, values, k=2)
    if nodes.size == 2:
        return make_interp_spline(nodes, values, k=1)
    raise ValueError("a piece needs at least 2 sample nodes")


@dataclass(frozen=True)
class GridFn1D:
    """Sampled function on a closed window, zero outside it.

    ``nodes`` must be strictly increasing with at least 4 entries inside
    ``window``.  ``decay_flag`` asserts the represented function genuinely
    decays at the window edges, which the Hilbert oracle requires.
    """

    nodes: np.ndarray
    values: np.ndarray
    window: tuple
    decay_flag: bool = True
    _spline: object = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.size < 4:
            raise ValueError("GridFn1D needs at least 4 nodes")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        lo, hi = self.window
        if nodes[0] < lo - 1e-12 or nodes[-1] > hi + 1e-12:
            raise ValueError("window must contain all nodes")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "window", (float(lo), float(hi)))
        object.__setattr__(self, "_spline", _build_spline(nodes, values))

    @classmethod
    def from_callable(cls, f, window=(-8.0, 8.0), n=4096, decay_flag=True,
                      extra_nodes=None):
        """Sample ``f`` uniformly on ``window``; ``extra_nodes`` are merged in."""
        nodes = np.linspace(window[0], window[1], n)
        if extra_nodes is not None:
            nodes = np.unique(np.concatenate([nodes, np.asarray(extra_nodes, float)]))
        return cls(nodes, f(nodes), window, decay_flag)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.nodes[0], self.nodes[-1]
        inside = (x >= lo) & (x <= hi)
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = self._spline(x[inside])
        return out if out.ndim else float(out)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.nodes[0]) & (x <= self.nodes[-1])
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = self._spline(x[inside], 1)
        return out if out.ndim else float(out)

    def l2_norm(self):
        """L2 norm over the window by trapezoid on the sample nodes."""
        return float(np.sqrt(np.trapezoid(self.values**2, self.nodes)))


@dataclass(frozen=True)
class Piece:
    """One smooth piece: samples plus the interpolating spline."""

    lo: float
    hi: float
    nodes: np.ndarray
    values: np.ndarray
    spline: object = field(repr=False, compare=False)

    def __post_init__(self):  # numpy arrays are stored as given
        pass


@dataclass(frozen=True)
class SobolevReport:
    """Result of a Sobolev-norm evaluation on a punctured domain."""

    order: int
    excluded: tuple
    per_piece: tuple
    total: float


class PiecewiseRegularFn:
    """Function smooth away from sorted breakpoints, with stored traces.

    Parameters
    ----------
    pieces : list of (nodes, values)
        One entry per interval between consecutive breakpoints (including
        the two unbounded-side intervals clipped to the window), ordered
        left to right.
    breakpoints : array_like
        Strictly increasing interior breakpoints; one fewer than pieces.
    window : (float, float)
        The function is treated as zero outside.
    traces : optional dict
        Arrays ``left_value, right_value, left_deriv, right_deriv`` (one
        entry per breakpoint).  Defaults to spline limits.
    """

    def __init__(self, pieces, breakpoints, window, traces=None):
        breakpoints = np.asarray(breakpoints, dtype=float)
        if breakpoints.ndim != 1:
            raise ValueError("breakpoints must be 1-D")
        if breakpoints.size and np.any(np.diff(breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if len(pieces) != breakpoints.size + 1:
            raise ValueError("need exactly len(breakpoints)+1 pieces")
        lo, hi = float(window[0]), float(window[1])
        if breakpoints.size and (breakpoints[0] <= lo or breakpoints[-1] >= hi):
            raise ValueError("breakpoints must lie inside the window")
        self.window = (lo, hi)
        self.breakpoints = breakpoints
        bounds = np.concatenate(([lo], breakpoints, [hi]))
        built = []
        for i, (nodes, values) in enumerate(pieces):
            nodes = np.asarray(nodes, dtype=float)
            values = np.asarray(values, dtype=float)
            if np.any(np.diff(nodes) <= 0):
                raise ValueError("piece nodes must be strictly increasing")
            if nodes[0] < bounds[i] - 1e-12 or nodes[-1] > bounds[i + 1] + 1e-12:
                raise ValueError("piece nodes must stay between its breakpoints")
            built.append(Piece(bounds[i], bounds[i + 1], nodes, values,
                               _build_spline(nodes, values)))
        self.pieces = tuple(built)
        traces = traces or {}
        nb = breakpoints.size

        def default(kind):
            if kind == "left_value":
                return [self.pieces[i].spline(self.pieces[i].nodes[-1]) for i in range(nb)]
            if kind == "right_value":
                return [self.pieces[i + 1].spline(self.pieces[i + 1].nodes[0]) for i in range(nb)]
            if kind == "left_deriv":
                return [self.pieces[i].spline(self.pieces[i].nodes[-1], 1) for i in range(nb)]
            return [self.pieces[i + 1].spline(self.pieces[i + 1].nodes[0], 1) for i in range(nb)]

        for kind in ("left_value", "right_value", "left_deriv", "right_deriv"):
            vals = traces.get(kind)
            vals = default(kind) if vals is None else vals
            setattr(self, kind, np.asarray(vals, dtype=float))

    # ------------------------------------------------------------------
    @classmethod
    def from_callables(cls, fns, breakpoints, window=(-8.0, 8.0),
                       n_per_piece=512, grading=None):
        """Build from one callable per piece.

        ``grading`` (optional) maps edge distances: nodes inside each piece
        cluster geometrically toward its finite breakpoints down to
        ``grading`` (absolute scale), which resolves trace behavior.
        """
        breakpoints = np.asarray(breakpoints, dtype=float)
        lo, hi = window
        bounds = np.concatenate(([lo], breakpoints, [hi]))
        pieces = []
        for i, f in enumerate(fns):
            a, b = bounds[i], bounds[i + 1]
            if grading:
                left_pad = a > lo
                right_pad = b < hi
                nodes = _graded_piece_nodes(a, b, n_per_piece, grading,
                                            left_pad, right_pad)
            else:
                nodes = np.linspace(a, b, n_per_piece)
            pieces.append((nodes, f(nodes)))
        return cls(pieces, breakpoints, window)

    def piece_index(self, x):
        """Index of the piece containing x (breakpoints belong to neither)."""
        return np.searchsorted(self.breakpoints, np.asarray(x, dtype=float))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros_like(x)
        idx = np.searchsorted(self.breakpoints, x)
        lo, hi = self.window
        inside = (x >= lo) & (x <= hi)
        for i, piece in enumerate(self.pieces):
            sel = inside & (idx == i)
            if np.any(sel):
                xx = np.clip(x[sel], piece.nodes[0], piece.nodes[-1])
                out[sel] = piece.spline(xx)
        return float(out[0]) if scalar else out

    def derivative(self, x, order=1):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros_like(x)
        idx = np.searchsorted(self.breakpoints, x)
        lo, hi = self.window
        inside = (x >= lo) & (x <= hi)
        for i, piece in enumerate(self.pieces):
            sel = inside & (idx == i)
            if np.any(sel):
                xx = np.clip(x[sel], piece.nodes[0], piece.nodes[-1])
                out[sel] = piece.spline(xx, order)
        return float(out[0]) if scalar else out

    # ------------------------------------------------------------------
    def _breakpoint_index(self, p, tol=1e-12):
        if self.breakpoints.size == 0:
            return None
        i = int(np.argmin(np.abs(self.breakpoints - p)))
        if abs(self.breakpoints[i] - p) <= tol * max(1.0, abs(p)) + tol:
            return i
        return None

    def trace(self, p, side):
        """One-sided limit of the function at ``p``.

        At a breakpoint the stored trace is returned; at interior points
        both sides agree with the spline value.
        """
        lo, hi = self.window
        if p < lo or p > hi:
            raise DomainError(f"point {p} outside window {self.window}")
        if side not in (LEFT, RIGHT):
            raise ValueError("side must be 'left' or 'right'")
        i = self._breakpoint_index(p)
        if i is not None:
            return float(self.left_value[i] if side == LEFT else self.right_value[i])
        return float(self(p))

    def jump(self, p):
        """Left trace minus right trace at breakpoint ``p``."""
        i = self._breakpoint_index(p)
        if i is None:
            raise DomainError(f"{p} is not a breakpoint")
        return float(self.left_value[i] - self.right_value[i])

    def deriv_trace(self, p, side):
        i = self._breakpoint_index(p)
        if i is None:
            both = self.derivative(p)
            return float(both)
        return float(self.left_deriv[i] if side == LEFT else self.right_deriv[i])

    # ------------------------------------------------------------------
    def sobolev_norm(self, order=2, excluded=()):
        """Quadrature Sobolev norm over the window minus excluded intervals.

        Returns a :class:`SobolevReport`; ``total**2`` is the sum over
        derivative orders ``k <= order`` of the squared L2 norms computed
        piece by piece from the splines.
        """
        if order not in (0, 1, 2):
            raise ValueError("order must be 0, 1 or 2")
        excluded = tuple((float(a), float(b)) for a, b in excluded)
        xg, wg = leggauss(5)
        per_piece = []
        covered = 0.0
        domain_len = 0.0
        for piece in self.pieces:
            spl = piece.spline
            knots = np.asarray(spl.x if hasattr(spl, "x") else piece.nodes)
            cuts = set(knots.tolist())
            for a, b in excluded:
                if piece.nodes[0] < a < piece.nodes[-1]:
                    cuts.add(a)
                if piece.nodes[0] < b < piece.nodes[-1]:
                    cuts.add(b)
            cuts = np.array(sorted(cuts))
            lo = cuts[:-1]
            hi = cuts[1:]
            mids = 0.5 * (lo + hi)
            keep = np.ones(mids.shape, dtype=bool)
            for a, b in excluded:
                keep &= ~((mids > a) & (mids < b))
            lo, hi = lo[keep], hi[keep]
            domain_len += float(np.sum(piece.nodes[-1] - piece.nodes[0]))
            covered += float(np.sum(hi - lo))
            if lo.size == 0:
                per_piece.append(0.0)
                continue
            half = 0.5 * (hi - lo)
            nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * xg
            acc = np.zeros_like(nodes)
            for k in range(order + 1):
                acc += spl(nodes, k) ** 2
            val = float(np.sum(acc * (half[:, None] * wg)))
            per_piece.append(np.sqrt(max(val, 0.0)))
        if covered <= 0.0:
            raise DomainError("excluded intervals cover the whole window")
        total = float(np.sqrt(np.sum(np.square(per_piece))))
        return SobolevReport(order, excluded, tuple(per_piece), total)

    # ------------------------------------------------------------------
    def to_csv(self, path):
        """Write the sample data as ``x,value,piece_index`` rows."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x,value,piece_index\n")
            for i, piece in enumerate(self.pieces):
                for x, v in zip(piece.nodes, piece.values):
                    fh.write(f"{x:.17g},{v:.17g},{i}\n")

    @classmethod
    def from_csv(cls, path, breakpoints, window, traces=None):
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        idx = data[:, 2].astype(int)
        pieces = []
        for i in range(idx.max() + 1):
            sel = idx == i
            pieces.append((data[sel, 0], data[sel, 1]))
        return cls(pieces, breakpoints, window, traces=traces)


def _graded_piece_nodes(a, b, n, scale, grade_left, grade_right):
    """Nodes on [a, b] clustered geometrically toward graded ends.

    Graded ends stop a distance ``scale`` short of the breakpoint; trace
    values live in the stored traces, not in the samples.
    """
    if not grade_left and not grade_right:
        return np.linspace(a, b, n)
    length = b - a
    scale = min(scale, 0.25 * length)
    if grade_left and grade_right:
        m = n // 2
        left = a + np.geomspace(scale, 0.5 * length, m)
        right = b - np.geomspace(scale, 0.5 * length, n - m)
        return np.unique(np.concatenate([left, right]))
    if grade_left:
        return a + np.geomspace(scale, length, n)
    return (b - np.geomspace(scale, length, n))[::-1]


def trace(f: PiecewiseRegularFn, p, side):
    """Module-level alias for :meth:`PiecewiseRegularFn.trace`."""
    return f.trace(p, side)


def jump(f: PiecewiseRegularFn, p):
    """Module-level alias for :meth:`PiecewiseRegularFn.jump`."""
    return f.jump(p)


def sobolev_norm(f: PiecewiseRegularFn, order=2, excluded=()):
    """Module-level alias for :meth:`PiecewiseRegularFn.sobolev_norm`."""
    return f.sobolev_norm(order, excluded)
