import math

import numpy as np
import pytest

from _helpers import clustered_nodes
from bhshock import cutoff
from bhshock.correctors import (
    CorrectorCoeffs,
    CutoffSpec,
    ShockStrengths,
    corrector_single,
    corrector_single_dt,
    corrector_single_dx,
    corrector_two,
    corrector_two_dx,
    dgb_db,
    eta,
    g_b,
    handoff_coeffs,
    hilbert_corrector_single,
    hilbert_corrector_two,
    phi,
    phi_dx,
    _weights,
)
from bhshock.errors import AdmissibilityError, DomainError, RegimeError
from bhshock.gridfn import GridFn1D
from bhshock.hilbert import gb_deriv, hilbert_pv

B_MAX = 1.0 / (2.0 * math.e)
SPEC = CutoffSpec()


def test_eta_plateau_and_support():
    assert eta(SPEC, 0.5) == 1.0
    assert eta(SPEC, 3.0) == 0.0
    assert eta(SPEC, -1.5) == eta(SPEC, 1.5)
    xs = np.linspace(0.0, 2.5, 200)
    vals = eta(SPEC, xs)
    assert np.all(np.diff(vals) <= 1e-12)  # nonincreasing for x >= 0
    assert np.all((vals >= 0) & (vals <= 1))
    # matches the module-level default cutoff
    assert np.allclose(vals, cutoff.eta(xs))


def test_eta_c2_seams():
    for seam in (1.0, 2.0):
        h = 1e-6
        for order in (0, 1, 2):
            lo = cutoff.eta_deriv(seam - h, order)
            hi = cutoff.eta_deriv(seam + h, order)
            assert abs(lo - hi) < 1e-3


def test_phi_anchor_values():
    for b in (0.0, 0.1, B_MAX):
        assert phi(0.0, b) == pytest.approx(0.0, abs=1e-15)
    assert phi(1.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert phi(1 / math.e, 0.0) == pytest.approx(-2.0 / (math.pi * math.e), rel=1e-14)


def test_phi_even():
    rng = np.random.default_rng(0)
    xs = rng.uniform(0.01, 3.0, 20)
    for b in (0.0, 0.07):
        assert np.allclose(phi(xs, b), phi(-xs, b))
        assert np.allclose(phi_dx(xs, b), -phi_dx(-xs, b))


def test_gb_support_and_bounds():
    assert g_b(0.1, -0.5) == 0.0
    zs = np.linspace(0.01, B_MAX * 0.99, 30)
    vals = g_b(0.0, zs)
    assert np.all(vals < 0)
    assert np.all(np.diff(vals) < 0)  # decreasing on (0, 1/(2e))
    # |g_b(z)| <= |z ln z|
    z = 0.1
    assert abs(g_b(0.05, z)) <= abs(z * math.log(z))
    for b in np.linspace(0.0, B_MAX, 7):
        zz = np.linspace(1e-4, B_MAX, 50)
        assert np.all(np.abs(g_b(b, zz)) <= np.abs(zz * np.log(zz)) + 1e-14)
    # zero off the support
    assert np.all(g_b(0.1, np.array([2.1, 5.0])) == 0.0)


def test_gb_matches_hilbert_module_profile():
    zs = np.linspace(-1.0, 2.5, 101)
    for b in (0.0, 0.08):
        assert np.allclose(g_b(b, zs), gb_deriv(zs, b, 0), atol=1e-14)


def test_dgb_db_formula_and_singular_parameter():
    with pytest.raises(DomainError):
        dgb_db(0.0, 0.1)
    b, x = 0.05, 0.3
    expect = (2 / math.pi) * (math.log(x + b) - math.log(b))
    assert dgb_db(b, x) == pytest.approx(expect, rel=1e-13)


def test_corrector_single_at_t0_matches_side_coefficients():
    co = CorrectorCoeffs(2.5, -0.5)
    xs = np.array([-0.4, -0.1, 0.1, 0.4])
    vals = corrector_single(co, 1.2, 0.0, 0.0, xs)
    expect = np.where(xs < 0, co.c1, co.c2) * phi(xs, 0.0)
    assert np.allclose(vals, expect, atol=1e-14)


def test_corrector_single_unit_coeffs_time_independent():
    co = CorrectorCoeffs(1.0, 1.0)
    xs = np.linspace(-2, 2, 41)
    v0 = corrector_single(co, 1.2, 0.0, 0.0, xs)
    v1 = corrector_single(co, 1.2, 0.3, 0.07, xs)
    assert np.allclose(v0, v1)
    assert np.allclose(corrector_single_dt(co, 1.2, 0.3, 0.07, xs), 0.0)


def test_corrector_single_vanishes_at_origin():
    co = CorrectorCoeffs(1.9, 0.2)
    for t in (0.0, 0.02, 0.1):
        assert corrector_single(co, 1.0, 0.0, t, 0.0) == pytest.approx(0.0, abs=1e-14)


def test_corrector_single_offset_regime_error():
    co = CorrectorCoeffs(2.0, 2.0)
    with pytest.raises(RegimeError):
        corrector_single(co, 4.0, 0.0, 0.1, 0.3)  # b = 0.2 > 1/(2e)


def test_corrector_single_dt_chains_offset_rate():
    co = CorrectorCoeffs(1.5, 0.7)
    sigma, sigma_dot, t = 1.1, 0.4, 0.05
    x = 0.21
    h = 1e-6
    num = (corrector_single(co, sigma + sigma_dot * h, sigma_dot, t + h, x)
           - corrector_single(co, sigma - sigma_dot * h, sigma_dot, t - h, x)) / (2 * h)
    assert corrector_single_dt(co, sigma, sigma_dot, t, x) == pytest.approx(num, rel=1e-5)


def test_corrector_two_anchors_and_continuity():
    sig = ShockStrengths(0.9, 0.7)
    t = -0.06
    assert corrector_two(sig, t, t) == pytest.approx(0.0, abs=1e-13)
    assert corrector_two(sig, t, 0.0) == pytest.approx(0.0, abs=1e-13)
    for seam in (t, 0.0):
        lo = corrector_two(sig, t, seam - 1e-8)
        hi = corrector_two(sig, t, seam + 1e-8)
        assert abs(lo - hi) <= 1e-6


def test_corrector_two_equal_strength_weights():
    sig = ShockStrengths(0.8, 0.8)
    lam1, lam2, _, _ = _weights(sig)
    assert lam1 == pytest.approx(1.0 / 3.0)
    assert lam2 == pytest.approx(1.0 / 3.0)


def test_corrector_two_random_continuity_grid():
    rng = np.random.default_rng(4)
    for _ in range(10):
        sig = ShockStrengths(*rng.uniform(0.2, 1.5, 2))
        t = -float(rng.uniform(0.01, 0.15))
        for seam in (t, 0.0):
            lo = corrector_two(sig, t, seam - 1e-8)
            hi = corrector_two(sig, t, seam + 1e-8)
            assert abs(lo - hi) <= 1e-6


def test_corrector_partials_log_envelope():
    # x-partials blow up no faster than |ln|x|| + |ln|x-t||
    sig = ShockStrengths(1.0, 0.6)
    t = -0.05
    for d in np.geomspace(1e-5, 1e-1, 9):
        for x in (d, -d, t + d, t - d):
            env = abs(math.log(abs(x) + 1e-300)) + abs(math.log(abs(x - t) + 1e-300))
            val = abs(corrector_two_dx(sig, t, x))
            assert val <= 2.0 * env + 1.0
    co = CorrectorCoeffs(1.4, 0.8)
    for d in np.geomspace(1e-5, 1e-1, 9):
        env = abs(math.log(d))
        assert abs(corrector_single_dx(co, 1.0, 0.0, 0.04, d)) <= 3.0 * env + 1.0


def test_corrector_two_near_field_matches_g_representation():
    # inside the cutoff plateau the three-branch formula equals the
    # translated/reflected g-profile combination used for its transform
    sig = ShockStrengths(0.9, 0.5)
    t = -0.04
    lam1, lam2, _, _ = _weights(sig)
    xs = np.linspace(-0.4, 0.4, 101)
    xs = xs[(np.abs(xs) > 1e-9) & (np.abs(xs - t) > 1e-9)]
    direct = corrector_two(sig, t, xs)
    rep = (phi(xs - t, 0.0) + phi(xs, 0.0) - phi(t, 0.0)
           - (1 - lam2) * gb_deriv(t - xs, abs(t), 0)
           - (1 - lam1) * gb_deriv(xs, abs(t), 0))
    assert np.max(np.abs(direct - rep)) < 1e-12


def test_handoff_coeffs_values():
    cs = handoff_coeffs(1.0, 1.0)
    assert cs.c1 == pytest.approx(4.0 / 3.0)
    assert cs.c2 == pytest.approx(4.0 / 3.0)
    cs = handoff_coeffs(1.0, 1e-13)
    assert cs.c1 == pytest.approx(1.0, abs=1e-9)
    assert cs.c2 == pytest.approx(2.0, abs=1e-9)
    cs = handoff_coeffs(1e-13, 1.0)
    assert cs.c1 == pytest.approx(2.0, abs=1e-9)
    assert cs.c2 == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(AdmissibilityError):
        handoff_coeffs(-1.0, 1.0)


def test_handoff_scale_invariance():
    rng = np.random.default_rng(9)
    for _ in range(10):
        s1, s2 = rng.uniform(0.1, 3.0, 2)
        lam = float(rng.uniform(0.2, 7.0))
        a = handoff_coeffs(s1, s2)
        b = handoff_coeffs(lam * s1, lam * s2)
        assert a.c1 == pytest.approx(b.c1, rel=1e-12)
        assert a.c2 == pytest.approx(b.c2, rel=1e-12)


def test_hilbert_corrector_single_oracle():
    co = CorrectorCoeffs(1.7, 0.4)
    sigma, t = 1.2, 0.05
    nodes = clustered_nodes([0.0, -2.0, 2.0], n=6000, reach=0.5)
    f = GridFn1D(nodes, corrector_single(co, sigma, 0.0, t, nodes), (-8, 8))
    for x in (-0.12, 0.07, 0.9):
        pv = hilbert_pv(f, x, split_points=[0.0, -2.0, 2.0, -1.0, 1.0])
        semi = hilbert_corrector_single(co, sigma, t, x)
        assert semi == pytest.approx(pv, abs=2e-6)


def test_hilbert_corrector_two_oracle():
    sig = ShockStrengths(0.8, 0.6)
    t = -0.04
    lam1, lam2, _, _ = _weights(sig)

    def rep(x):
        return (phi(x - t, 0.0) + phi(x, 0.0)
                - (1 - lam2) * gb_deriv(t - x, abs(t), 0)
                - (1 - lam1) * gb_deriv(x, abs(t), 0))

    nodes = clustered_nodes([t, 0.0, 2.0, -2.0, 2.0 + t, -2.0 + t], n=6000, reach=0.4)
    f = GridFn1D(nodes, rep(nodes), (-8, 8))
    splits = [t, 0.0, 2.0, -2.0, 2.0 + t, -2.0 + t, 1.0, -1.0, 1.0 + t]
    for x in (-0.3, 0.11, t / 2):
        pv = hilbert_pv(f, x, split_points=splits)
        semi = hilbert_corrector_two(sig, t, x)
        assert semi == pytest.approx(pv, abs=2e-6)
