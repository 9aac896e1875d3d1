"""Density-matrix utilities: validation, purity bookkeeping, random
ensembles, Hilbert-Schmidt distance, and a closed-form 2x2 Hermitian
eigensolver used for pointer readout.

Matrices are plain complex ndarrays.  A validated state is wrapped in
:class:`DensityMatrix` so downstream code can rely on its invariants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDimension,
    InvalidRank,
    NotHermitian,
    NotPositive,
    ShapeMismatch,
    TraceNotOne,
)
from .rng import RandomStream

# Validation tolerances (absolute; states are trace-normalized so the scale is 1).
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_TOL = 1e-10


@dataclass(frozen=True)
class DensityMatrix:
    """A validated d x d quantum state.  Construct via :func:`validate_density`."""

    dim: int
    matrix: np.ndarray


@dataclass(frozen=True)
class PurityStats:
    """tr(rho^2) split into elementwise real/imaginary contributions.

    purity_re = sum (Re rho_nm)^2 and purity_im = sum (Im rho_nm)^2, so that
    purity == purity_re + purity_im for any Hermitian rho.
    """

    purity: float
    purity_re: float
    purity_im: float


def validate_density(m: np.ndarray) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity, and wrap the matrix.

    Raises ShapeMismatch / InvalidDimension / NotHermitian / TraceNotOne /
    NotPositive with the measured deviation in the message.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"density matrix must be square 2-D, got shape {m.shape}")
    d = m.shape[0]
    if d < 2:
        raise InvalidDimension(f"system dimension must be >= 2, got {d}")
    herm_dev = np.max(np.abs(m - m.conj().T))
    if herm_dev > HERMITIAN_TOL:
        raise NotHermitian(f"max |m - m^dag| = {herm_dev:.3e} exceeds {HERMITIAN_TOL:.0e}")
    trace_dev = abs(np.trace(m) - 1.0)
    if trace_dev > TRACE_TOL:
        raise TraceNotOne(f"|tr(m) - 1| = {trace_dev:.3e} exceeds {TRACE_TOL:.0e}")
    min_eig = float(np.linalg.eigvalsh(m)[0])
    if min_eig < -EIGENVALUE_TOL:
        raise NotPositive(f"smallest eigenvalue {min_eig:.3e} below -{EIGENVALUE_TOL:.0e}")
    return DensityMatrix(dim=d, matrix=m)


def purity_stats(rho: DensityMatrix) -> PurityStats:
    """Purity tr(rho^2) together with its real/imaginary element sums."""
    m = rho.matrix
    re2 = float(np.sum(m.real**2))
    im2 = float(np.sum(m.imag**2))
    return PurityStats(purity=re2 + im2, purity_re=re2, purity_im=im2)


def random_pure(d: int, rng: RandomStream) -> DensityMatrix:
    """Haar-random pure state |v><v| from a normalized complex-normal vector."""
    if d < 2:
        raise InvalidDimension(f"system dimension must be >= 2, got {d}")
    z = rng.normals(2 * d)
    v = z[:d] + 1j * z[d:]
    v /= np.linalg.norm(v)
    return validate_density(np.outer(v, v.conj()))


def random_mixed(d: int, rank: int, rng: RandomStream) -> DensityMatrix:
    """Random rank-`rank` mixed state G G^dag / tr(G G^dag), G complex Ginibre d x rank."""
    if d < 2:
        raise InvalidDimension(f"system dimension must be >= 2, got {d}")
    if not 1 <= rank <= d:
        raise InvalidRank(f"rank must be in 1..{d}, got {rank}")
    z = rng.normals(2 * d * rank)
    g = (z[: d * rank] + 1j * z[d * rank :]).reshape(d, rank)
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2.0  # kill rounding asymmetry
    m /= np.trace(m).real
    return validate_density(m)


def hs_distance_sq(a: np.ndarray, b: np.ndarray) -> float:
    """Squared Hilbert-Schmidt distance sum |a_nm - b_nm|^2."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ShapeMismatch(f"operands differ in shape: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.sum(diff.real**2 + diff.imag**2))


def eig_hermitian_2x2(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigensystem of a 2x2 Hermitian matrix.

    Writes m = [[t+z, x-iy], [x+iy, t-z]] with t, z, x, y real; then the
    eigenvalues are t -+ r with r = sqrt(x^2+y^2+z^2).  Returns
    (eigenvalues ascending, eigenvector columns), orthonormal and with a
    deterministic phase convention.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ShapeMismatch(f"expected a 2x2 matrix, got shape {m.shape}")
    herm_dev = np.max(np.abs(m - m.conj().T))
    if herm_dev > HERMITIAN_TOL:
        raise NotHermitian(f"max |m - m^dag| = {herm_dev:.3e} exceeds {HERMITIAN_TOL:.0e}")

    t = (m[0, 0].real + m[1, 1].real) / 2.0
    z = (m[0, 0].real - m[1, 1].real) / 2.0
    x = m[1, 0].real
    y = m[1, 0].imag
    rho2 = x * x + y * y
    r = np.sqrt(rho2 + z * z)
    evals = np.array([t - r, t + r])

    if rho2 == 0.0:
        # Already diagonal; order columns to match ascending eigenvalues.
        if z > 0.0:
            evecs = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        else:
            evecs = np.eye(2, dtype=complex)
        return evals, evecs

    # r - z computed cancellation-free for either sign of z.
    rmz = rho2 / (r + z) if z >= 0.0 else r - z
    c = np.sqrt(2.0 * r * rmz)
    evecs = np.array(
        [[-rmz / c, (x - 1j * y) / c], [(x + 1j * y) / c, rmz / c]], dtype=complex
    )
    return evals, evecs
