"""Shock-fitting solvers and verification oracles for the Burgers-Hilbert
equation u_t + (u^2/2)_x = H[u]."""

from .gridfn import GridFn1D, PiecewiseRegularFn, SobolevReport, jump, sobolev_norm, trace
from .hilbert import hilbert_gb, hilbert_gb_all, hilbert_l2_norm, hilbert_piecewise, hilbert_pv
from .correctors import (
    CorrectorCoeffs,
    CutoffSpec,
    ShockStrengths,
    corrector_single,
    corrector_two,
    eta,
    g_b,
    handoff_coeffs,
    phi,
)

__all__ = [
    "GridFn1D",
    "PiecewiseRegularFn",
    "SobolevReport",
    "trace",
    "jump",
    "sobolev_norm",
    "hilbert_pv",
    "hilbert_piecewise",
    "hilbert_gb",
    "hilbert_gb_all",
    "hilbert_l2_norm",
    "CutoffSpec",
    "CorrectorCoeffs",
    "ShockStrengths",
    "eta",
    "phi",
    "g_b",
    "corrector_single",
    "corrector_two",
    "handoff_coeffs",
]

__version__ = "0.1.0"
