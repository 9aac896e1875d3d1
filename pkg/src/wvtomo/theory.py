"""Closed-form error analysis: MSE of the raw and hermitized estimators,
optimal coupling strengths, and scaled-MSE baselines for comparison with
projective MUB / SIC tomography."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimension, StrengthOutOfRange
from .protocol import SINGULAR_TOL, CouplingStrengths
from .qmath import DensityMatrix, PurityStats, purity_stats


@dataclass(frozen=True)
class TheoryInput:
    dim: int
    strengths: CouplingStrengths
    shots: int
    purity: PurityStats

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError(f"shot count must be >= 1, got {self.shots}")


@dataclass(frozen=True)
class HermitizedMse:
    total: float
    off_diagonal: float
    diagonal: float


@dataclass(frozen=True)
class ComparisonRow:
    dim: int
    scheme: str
    scaled_mse: float


def _guard(strengths: CouplingStrengths) -> None:
    for name, g in (("g_r", strengths.g_r), ("g_i", strengths.g_i)):
        if abs(np.sin(g)) < SINGULAR_TOL or abs(np.cos(g / 2.0)) < SINGULAR_TOL:
            raise StrengthOutOfRange(f"{name} = {g!r} too close to a singular point")


def _sqrt_term(d: int) -> float:
    return float(np.sqrt(d / 2.0 + d * d / 16.0))


def mse_raw(inp: TheoryInput) -> float:
    """MSE of the raw (non-Hermitian) estimator:
    (1/N)[(d^2/4)(1/sin^2 g_R + 1/sin^2 g_I) + d/(2 cos^2(g_R/2)) - tr(rho^2)]."""
    _guard(inp.strengths)
    d = inp.dim
    sr = np.sin(inp.strengths.g_r)
    si = np.sin(inp.strengths.g_i)
    cr = np.cos(inp.strengths.g_r / 2.0)
    bracket = d * d / 4.0 * (1.0 / sr**2 + 1.0 / si**2) + d / (2.0 * cr**2) - inp.purity.purity
    return float(bracket / inp.shots)


def optimal_strengths(d: int) -> CouplingStrengths:
    """Minimizers of mse_raw: g_R = arccos(1 + d/4 - sqrt(d/2 + d^2/16)), g_I = pi/2."""
    if d < 2:
        raise InvalidDimension(f"system dimension must be >= 2, got {d}")
    arg = 1.0 + d / 4.0 - _sqrt_term(d)
    if not -1.0 < arg < 1.0:
        raise InvalidDimension(f"arccos argument {arg!r} fell outside (-1, 1) for d={d}")
    return CouplingStrengths(g_r=float(np.arccos(arg)), g_i=float(np.pi / 2.0))


def mse_raw_optimal(d: int, shots: int, purity: float) -> float:
    """mse_raw at the optimal strengths:
    (1/N)[3d^2/8 + (d/2)(sqrt(d/2 + d^2/16) + 1) - tr(rho^2)]."""
    return float((3.0 * d * d / 8.0 + d / 2.0 * (_sqrt_term(d) + 1.0) - purity) / shots)


def mse_hermitized(inp: TheoryInput) -> HermitizedMse:
    """MSE of the hermitized estimator, split into off-diagonal and diagonal
    parts under the uniform-variance approximation (exact in the strength
    terms; the state-dependent term spreads tr(rho^2) uniformly over
    elements).  See mse_hermitized_exact for the exact bookkeeping."""
    _guard(inp.strengths)
    d, n = inp.dim, inp.shots
    sr = np.sin(inp.strengths.g_r)
    si = np.sin(inp.strengths.g_i)
    cr = np.cos(inp.strengths.g_r / 2.0)
    bracket = (
        d * d / 4.0 * (1.0 / sr**2 + 1.0 / si**2) + d / (2.0 * cr**2) - inp.purity.purity
    )
    off = (d - 1.0) / (2.0 * d * n) * bracket
    dia = (d * d / (4.0 * sr**2) + d / (2.0 * cr**2) - inp.purity.purity_re) / (d * n)
    return HermitizedMse(total=float(off + dia), off_diagonal=float(off), diagonal=float(dia))


def mse_hermitized_optimal(d: int, shots: int, purity_re: float, purity_im: float) -> float:
    """mse_hermitized at the optimal strengths:
    ((d+1)/2dN)[d^2/8 + (d/2)(sqrt(d/2+d^2/16)+1) - tr((Re rho)^2)]
    + ((d-1)/2dN)[d^2/4 - tr((Im rho)^2)]."""
    s = _sqrt_term(d)
    term_re = (d + 1.0) / (2.0 * d * shots) * (d * d / 8.0 + d / 2.0 * (s + 1.0) - purity_re)
    term_im = (d - 1.0) / (2.0 * d * shots) * (d * d / 4.0 - purity_im)
    return float(term_re + term_im)


def mse_hermitized_exact(rho: DensityMatrix, strengths: CouplingStrengths, shots: int) -> float:
    """Hermitized MSE with exact per-element variance bookkeeping.

    Differs from mse_hermitized by
        [sum_n rho_nn^2 / 2 - (tr((Re rho)^2) - tr((Im rho)^2)) / (2d)] / N,
    which vanishes only for special states; the enumeration oracle matches
    this form to machine precision.
    """
    _guard(strengths)
    d, n = rho.dim, shots
    sr = np.sin(strengths.g_r)
    si = np.sin(strengths.g_i)
    cr = np.cos(strengths.g_r / 2.0)
    pur = purity_stats(rho)
    diag_sq = float(np.sum(rho.matrix.diagonal().real ** 2))
    bracket = (
        (d * d + d) / (8.0 * sr**2)
        + (d * d - d) / (8.0 * si**2)
        + (d + 1.0) / (4.0 * cr**2)
        - (pur.purity + diag_sq) / 2.0
    )
    return float(bracket / n)


def scaled_mse_menu(
    d: int, purity: float, purity_re: float, purity_im: float
) -> list[ComparisonRow]:
    """Per-measurement (and per-copy) scaled MSEs of this scheme at its
    optimum, next to the projective MUB and SIC baselines.

    The hermitized-per-shot and per-copy rows are the large-d forms (half of
    and d times the raw bracket); the -exact row evaluates the full
    hermitized optimum so the approximation error stays visible.
    """
    if d < 2:
        raise InvalidDimension(f"system dimension must be >= 2, got {d}")
    bracket = 3.0 * d * d / 8.0 + d / 2.0 * (_sqrt_term(d) + 1.0) - purity
    return [
        ComparisonRow(d, "raw-per-shot", float(bracket)),
        ComparisonRow(d, "hermitized-per-shot-approx", float(bracket / 2.0)),
        ComparisonRow(
            d, "hermitized-per-shot-exact", mse_hermitized_optimal(d, 1, purity_re, purity_im)
        ),
        ComparisonRow(d, "per-copy-approx", float(d * bracket)),
        ComparisonRow(d, "mub", float((d + 1.0) * (d - purity))),
        ComparisonRow(d, "sic", float(d * d + d - 1.0 - purity)),
    ]


def _golden_section(f, a: float, b: float, tol: float = 1e-10) -> float:
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    e = a + invphi * (b - a)
    fc, fe = f(c), f(e)
    while b - a > tol:
        if fc < fe:
            b, e, fe = e, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + invphi * (b - a)
            fe = f(e)
    return (a + b) / 2.0


def numeric_optimal_strengths(d: int) -> CouplingStrengths:
    """Independent check of optimal_strengths: coarse grid over (0.01, pi-0.01)
    then golden-section refinement of each strength's part of mse_raw."""
    if d < 2:
        raise InvalidDimension(f"system dimension must be >= 2, got {d}")

    def part_r(g):
        return d * d / (4.0 * np.sin(g) ** 2) + d / (2.0 * np.cos(g / 2.0) ** 2)

    def part_i(g):
        return d * d / (4.0 * np.sin(g) ** 2)

    lo, hi = 0.01, np.pi - 0.01
    grid = np.linspace(lo, hi, 201)
    found = []
    for f in (part_r, part_i):
        k = int(np.argmin([f(g) for g in grid]))
        a = grid[max(k - 1, 0)]
        b = grid[min(k + 1, len(grid) - 1)]
        found.append(_golden_section(f, a, b))
    return CouplingStrengths(g_r=found[0], g_i=found[1])
