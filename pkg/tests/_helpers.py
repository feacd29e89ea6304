"""Shared builders for randomized test functions."""

import numpy as np

from bhshock.gridfn import GridFn1D, PiecewiseRegularFn


def clustered_nodes(points, lo=-8.0, hi=8.0, n=4096, depth=1e-9, reach=0.2):
    """Uniform nodes plus geometric clusters toward each listed point."""
    base = np.linspace(lo, hi, n)
    extra = []
    for p in points:
        d = np.geomspace(depth, reach, 48)
        extra.append(p - d)
        extra.append(p + d)
    nodes = np.unique(np.concatenate([base] + extra))
    return nodes[(nodes >= lo) & (nodes <= hi)]


def smooth_compact_fn(rng, half_width=6.0, n_bumps=4, mean_zero=False):
    """Random smooth function supported in [-half_width, half_width]."""
    centers = rng.uniform(-0.5 * half_width, 0.5 * half_width, n_bumps)
    widths = rng.uniform(0.4, 1.2, n_bumps)
    amps = rng.uniform(-1.0, 1.0, n_bumps)

    def gauss_sum(x):
        return sum(a * np.exp(-((x - c) / s) ** 2 / 2.0)
                   for a, c, s in zip(amps, centers, widths))

    def bump(x):
        return np.clip(1.0 - (x / half_width) ** 2, 0.0, None) ** 3

    if not mean_zero:
        return lambda x: bump(x) * gauss_sum(x)

    # derivative of a compact function integrates to zero
    h = 1e-5

    def f(x):
        g = lambda y: bump(y) * gauss_sum(y)
        return (g(x + h) - g(x - h)) / (2.0 * h)

    return f


def random_piecewise_cubic(rng, n_jumps=None, window=(-8.0, 8.0)):
    """Piecewise cubic times a decaying envelope, with 1-3 genuine jumps.

    Returns ``(fn, breakpoints)`` where ``fn`` is a PiecewiseRegularFn.
    """
    if n_jumps is None:
        n_jumps = int(rng.integers(1, 4))
    while True:
        bps = np.sort(rng.uniform(-3.0, 3.0, n_jumps))
        if n_jumps == 1 or np.min(np.diff(bps)) > 0.6:
            break

    def make_piece():
        coef = rng.uniform(-0.6, 0.6, 4)

        def piece(x):
            poly = coef[0] + coef[1] * x + coef[2] * x**2 + coef[3] * x**3
            return poly * np.exp(-(x**2) / 6.0)

        return piece

    fns = [make_piece() for _ in range(n_jumps + 1)]
    f = PiecewiseRegularFn.from_callables(fns, bps, window=window,
                                          n_per_piece=300, grading=1e-7)
    return f, bps


def sample_piecewise(f: PiecewiseRegularFn, n=4096):
    """GridFn1D view of a piecewise function with clustered jump sampling."""
    nodes = clustered_nodes(list(f.breakpoints), *f.window, n=n)
    # keep strictly off the breakpoints so each sample picks one side
    for p in f.breakpoints:
        nodes = nodes[np.abs(nodes - p) > 1e-10]
    return GridFn1D(nodes, f(nodes), f.window)
