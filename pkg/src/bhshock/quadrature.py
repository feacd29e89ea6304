"""Gauss-Legendre panel quadrature with geometric grading.

Singular kernels (1/y near 0, ln|x-y| near x) are handled by splitting the
integration interval at the singular point and refining panels geometrically
toward it; each panel is integrated with a fixed Gauss-Legendre rule.  For
logarithmic kernels the value at the singular point is subtracted and its
contribution added back in closed form, so the quadrature only ever sees a
mildly singular ``(y-s) ln|y-s|`` remainder.
"""

from functools import lru_cache

import numpy as np

DEFAULT_PANELS = 12
DEFAULT_GL_NODES = 10
GRADE_RATIO = 0.5


@lru_cache(maxsize=32)
def leggauss(n: int):
    """Cached Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def graded_edges(a, b, n_panels=DEFAULT_PANELS, ratio=GRADE_RATIO, toward="left"):
    """Panel edges on [a, b], widths shrinking geometrically toward one end.

    ``toward='left'`` puts the smallest panel at ``a``.  Edges are returned
    increasing.  Supports vector ``a``/``b`` (broadcast), returning an array
    of shape ``(..., n_panels + 1)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # cumulative fractions 0, r^{P-1}, ..., r, 1 measured from the refined end
    frac = np.concatenate(([0.0], ratio ** np.arange(n_panels - 1, -1, -1.0)))
    if toward == "left":
        rel = frac
    elif toward == "right":
        rel = 1.0 - frac[::-1]
    else:
        raise ValueError(f"toward must be 'left' or 'right', got {toward!r}")
    return a[..., None] + (b - a)[..., None] * rel


def panel_rule(edges, n_gl=DEFAULT_GL_NODES):
    """Quadrature nodes/weights for composite Gauss-Legendre over panels.

    ``edges`` has shape ``(..., P+1)`` with increasing entries; returns
    ``(nodes, weights)`` of shape ``(..., P*n_gl)``.
    """
    edges = np.asarray(edges, dtype=float)
    xg, wg = leggauss(n_gl)
    lo = edges[..., :-1]
    hi = edges[..., 1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[..., None] + half[..., None] * xg
    weights = half[..., None] * wg
    shape = nodes.shape[:-2] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def integrate_panels(f, edges, n_gl=DEFAULT_GL_NODES):
    """Integrate callable ``f`` over the union of panels given by ``edges``."""
    nodes, weights = panel_rule(edges, n_gl)
    return np.sum(f(nodes) * weights, axis=-1)


def log_primitive(h):
    """Exact value of ``int_0^h ln(z) dz = h (ln h - 1)``, 0 at h = 0."""
    h = np.asarray(h, dtype=float)
    out = np.zeros_like(h)
    pos = h > 0.0
    out[pos] = h[pos] * (np.log(h[pos]) - 1.0)
    return out if out.ndim else float(out)


def integrate_log_kernel(f, a, b, s, f_at_s=None, n_panels=DEFAULT_PANELS,
                         n_gl=DEFAULT_GL_NODES):
    """Compute ``int_a^b f(y) ln|y - s| dy`` with ``s`` inside or at an edge.

    The singular-point value is subtracted: the ``f(s) ln|y-s|`` part is
    integrated in closed form, the remainder with geometrically graded
    panels toward ``s``.  ``f`` must accept arrays; ``f_at_s`` overrides the
    value used for subtraction (useful when ``f`` is one-sided at ``s``).

    Vectorized over ``s`` (and matching ``a``/``b``).
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    a, b, s = np.broadcast_arrays(a, b, s)
    if np.any(s < a - 1e-300) or np.any(s > b + 1e-300):
        raise ValueError("singular point must lie inside [a, b]")
    fs = f(s) if f_at_s is None else np.broadcast_to(np.asarray(f_at_s, float), s.shape)

    total = fs * (log_primitive(s - a) + log_primitive(b - s))

    def remainder(lo, hi, toward):
        width = hi - lo
        live = width > 0.0
        if not np.any(live):
            return np.zeros_like(s)
        edges = graded_edges(lo, hi, n_panels=n_panels, toward=toward)
        nodes, weights = panel_rule(edges, n_gl)
        vals = (f(nodes) - fs[..., None]) * np.log(np.abs(nodes - s[..., None]))
        out = np.sum(vals * weights, axis=-1)
        return np.where(live, out, 0.0)

    total = total + remainder(a, s, "right") + remainder(s, b, "left")
    return total if total.shape != (1,) else float(total[0])


def split_edges(a, b, points, n_per_span=8):
    """Scalar panel edges for [a, b] split at interior ``points``.

    Each resulting span gets ``n_per_span`` uniform panels.  Used when an
    integrand is only piecewise smooth.
    """
    pts = [p for p in np.atleast_1d(points) if a < p < b]
    cuts = np.concatenate(([a], np.sort(pts), [b]))
    edges = [
        np.linspace(cuts[i], cuts[i + 1], n_per_span + 1)
        for i in range(len(cuts) - 1)
    ]
    merged = np.concatenate([e[:-1] for e in edges] + [cuts[-1:]])
    return merged
