import math

import numpy as np
import pytest

from _helpers import clustered_nodes, random_piecewise_cubic, sample_piecewise, smooth_compact_fn
from bhshock.errors import AccuracyError, DomainError
from bhshock.gridfn import GridFn1D, PiecewiseRegularFn
from bhshock.hilbert import (
    gb_deriv,
    hilbert_gb,
    hilbert_gb_all,
    hilbert_l2_norm,
    hilbert_piecewise,
    hilbert_pv,
)

B_MAX = 1.0 / (2.0 * math.e)


# ---------------------------------------------------------------------------
# principal-value oracle
# ---------------------------------------------------------------------------

def test_pv_even_function_vanishes_at_center():
    f = GridFn1D.from_callable(lambda x: np.exp(-(x**2)), window=(-8, 8), n=2048)
    assert hilbert_pv(f, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_pv_indicator_log3():
    nodes = clustered_nodes([-1.0, 1.0])
    f = GridFn1D(nodes, ((nodes >= -1) & (nodes <= 1)).astype(float), (-8, 8))
    v = hilbert_pv(f, 2.0, split_points=[-1.0, 1.0])
    assert v == pytest.approx(math.log(3.0) / math.pi, rel=1e-8)


def test_pv_lorentzian_pair():
    # H[1/(1+x^2)](x) = x/(1+x^2); wide window so the slow decay is captured
    f = GridFn1D.from_callable(lambda x: 1 / (1 + x**2), window=(-60, 60), n=8192)
    assert hilbert_pv(f, 1.0) == pytest.approx(0.5, abs=5e-5)


def test_pv_accuracy_error():
    f = GridFn1D.from_callable(lambda x: np.exp(-(x**2)), window=(-8, 8), n=64)
    with pytest.raises(AccuracyError):
        hilbert_pv(f, 0.37, tol=1e-15)


def test_pv_isometry_sample():
    rng = np.random.default_rng(11)
    for _ in range(3):
        f = GridFn1D.from_callable(smooth_compact_fn(rng), window=(-8, 8), n=4096)
        ratio = hilbert_l2_norm(f) / f.l2_norm()
        assert 0.99 <= ratio <= 1.01


def test_pv_linearity():
    rng = np.random.default_rng(7)
    g1 = smooth_compact_fn(rng)
    g2 = smooth_compact_fn(rng)
    a, b = rng.uniform(-2, 2, 2)
    mk = lambda fn: GridFn1D.from_callable(fn, window=(-8, 8), n=2048)
    xs = np.linspace(-4, 4, 17)
    lhs = hilbert_pv(mk(lambda x: a * g1(x) + b * g2(x)), xs)
    rhs = a * hilbert_pv(mk(g1), xs) + b * hilbert_pv(mk(g2), xs)
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_pv_anti_involution():
    rng = np.random.default_rng(3)
    f_call = smooth_compact_fn(rng, mean_zero=True)
    f = GridFn1D.from_callable(f_call, window=(-8, 8), n=4096)
    # resample the intermediate on a wider window: H[f] decays like 1/x^2
    # for mean-zero f, so the truncation tail is negligible
    wide = np.linspace(-32, 32, 6000)
    mid = GridFn1D(wide, hilbert_pv_on_wide(f, wide), (-32, 32))
    xs = np.linspace(-4, 4, 41)
    back = hilbert_pv(mid, xs)
    ref = f(xs)
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(back + ref)) <= 1e-2 * scale


def hilbert_pv_on_wide(f, xs):
    from bhshock.hilbert import hilbert_outside

    lo, hi = f.window
    inside = (xs > lo) & (xs < hi)
    out = np.empty_like(xs)
    out[inside] = hilbert_pv(f, xs[inside])
    out[~inside] = hilbert_outside(f, xs[~inside])
    return out


# ---------------------------------------------------------------------------
# integration-by-parts form
# ---------------------------------------------------------------------------

def test_piecewise_zero():
    xs = np.linspace(-8, 8, 64)
    f = PiecewiseRegularFn([(xs, np.zeros_like(xs))], [], (-8, 8))
    assert hilbert_piecewise(f, 0.3) == 0.0


def test_piecewise_indicator_jump_terms():
    # indicator of [-1, 0): flat pieces, so only the jump terms contribute
    pieces = [(np.linspace(-8, -1, 80), np.zeros(80)),
              (np.linspace(-1, 0, 80), np.ones(80)),
              (np.linspace(0, 8, 80), np.zeros(80))]
    f = PiecewiseRegularFn(pieces, [-1.0, 0.0], (-8, 8))
    assert hilbert_piecewise(f, 1.0) == pytest.approx(math.log(2.0) / math.pi, rel=1e-10)


def test_piecewise_breakpoint_target_errors():
    pieces = [(np.linspace(-8, -1e-6, 50), np.ones(50)),
              (np.linspace(1e-6, 8, 50), np.zeros(50))]
    f = PiecewiseRegularFn(pieces, [0.0], (-8, 8))
    with pytest.raises(DomainError):
        hilbert_piecewise(f, 0.0)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_piecewise_matches_pv_oracle(seed):
    rng = np.random.default_rng(seed)
    f, bps = random_piecewise_cubic(rng)
    grid = sample_piecewise(f)
    xs = np.linspace(-5, 5, 37)
    keep = np.min(np.abs(xs[:, None] - np.asarray(bps)), axis=1) >= 0.05
    xs = xs[keep]
    ibp = hilbert_piecewise(f, xs)
    pv = hilbert_pv(grid, xs, split_points=list(bps))
    scale = np.max(np.abs(pv))
    assert np.max(np.abs(ibp - pv)) <= 1e-3 * scale


def test_piecewise_smooth_matches_pv():
    rng = np.random.default_rng(21)
    fn = smooth_compact_fn(rng)
    xs_nodes = np.linspace(-8, 8, 1200)
    f = PiecewiseRegularFn([(xs_nodes, fn(xs_nodes))], [], (-8, 8))
    g = GridFn1D.from_callable(fn, window=(-8, 8), n=4096)
    xs = np.linspace(-3, 3, 11)
    a = hilbert_piecewise(f, xs)
    b = hilbert_pv(g, xs)
    assert np.max(np.abs(a - b)) <= 1e-3 * max(np.max(np.abs(b)), 1e-6)


# ---------------------------------------------------------------------------
# semi-analytic corrector-profile transform
# ---------------------------------------------------------------------------

def _sampled_gb(b):
    nodes = clustered_nodes([0.0, 2.0], lo=-4, hi=4, n=6000, reach=0.5)
    return GridFn1D(nodes, gb_deriv(nodes, b, 0), (-4, 4))


@pytest.mark.parametrize("b", [0.0, 0.05])
def test_gb_matches_pv_oracle(b):
    f = _sampled_gb(b)
    for x in (-0.1, 0.13, 1.5, -3.0):
        pv = hilbert_pv(f, x, split_points=[0.0, 1.0, 2.0])
        semi = hilbert_gb(b, x)
        assert semi == pytest.approx(pv, abs=2e-6)


def test_gb_derivatives_match_finite_differences():
    for b in (0.0, 0.05):
        for x in (0.06, -0.09):
            h = 1e-4 * abs(x)
            grid = np.array([x - 2 * h, x - h, x, x + h, x + 2 * h])
            vals = hilbert_gb_all(b, grid, max_order=3)
            d1 = (vals[0, 3] - vals[0, 1]) / (2 * h)
            d2 = (vals[0, 3] - 2 * vals[0, 2] + vals[0, 1]) / h**2
            d3 = (vals[0, 4] - 2 * vals[0, 3] + 2 * vals[0, 1] - vals[0, 0]) / (2 * h**3)
            assert vals[1, 2] == pytest.approx(d1, rel=1e-5)
            assert vals[2, 2] == pytest.approx(d2, rel=1e-4)
            assert vals[3, 2] == pytest.approx(d3, rel=1e-2)


def test_gb_far_field_decay():
    xs = np.array([10.0, 20.0, 40.0, -15.0])
    vals = hilbert_gb_all(0.0, xs, max_order=0)[0]
    ratios = np.abs(vals) * np.abs(xs)
    assert np.all(ratios < 1.0)
    # |H| itself decays
    assert abs(vals[2]) < abs(vals[1]) < abs(vals[0])


def test_gb_small_x_envelope_shapes():
    xs = np.geomspace(1e-4, B_MAX * 0.999, 25)
    for b in (0.0, 1e-3, 0.1, B_MAX):
        H = hilbert_gb_all(b, xs, max_order=3)
        envelopes = [np.ones_like(xs), np.log(xs) ** 2,
                     np.abs(np.log(xs)) / xs, np.abs(np.log(xs)) / xs**2]
        for k in range(4):
            ratios = np.abs(H[k]) / envelopes[k]
            assert np.all(np.isfinite(ratios))
            assert np.max(ratios) < 5.0


def test_gb_order_above_three_unsupported():
    with pytest.raises(DomainError):
        hilbert_gb(0.0, 0.1, deriv_order=4)


def test_gb_warns_outside_regime():
    with pytest.warns(UserWarning):
        hilbert_gb(0.5, 0.1)
