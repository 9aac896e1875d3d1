"""Exact forward model of weak-value tomography.

A d-dimensional system couples to a qubit pointer (initially |0><0|)
through U_n = exp(-i g |a_n><a_n| (x) sigma_x), then the system is
post-selected in a Fourier basis unbiased to {|a_n>}.  The surviving
pointer carries the weak value W_nj in two quadrature observables, and
the full set {W_nj} linearly reconstructs the state.

Tensor ordering is system (x) device everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    IndexOutOfRange,
    InvalidDimension,
    NotPositive,
    ShapeMismatch,
    StrengthMismatch,
    StrengthOutOfRange,
    UndefinedWeakValue,
)
from .qmath import DensityMatrix

# Post-selection outcomes with probability at or below this are undefined-but-unused.
PROB_DEFINED_TOL = 1e-12
# Guard against evaluating 1/sin(g) or 1/cos(g/2) at a singular point.
SINGULAR_TOL = 1e-9

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
DEVICE_ZERO = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)  # pointer |0><0|


@dataclass(frozen=True)
class MeasurementBases:
    """Coupling basis {|a_n>} and post-selection basis {|psi_j>} as column matrices."""

    dim: int
    a_basis: np.ndarray    # column n is |a_n>
    psi_basis: np.ndarray  # column j is |psi_j>

    def overlaps(self) -> np.ndarray:
        """Matrix O[j, n] = <psi_j|a_n>."""
        return self.psi_basis.conj().T @ self.a_basis


@dataclass(frozen=True)
class CouplingStrengths:
    """The pair (g_R, g_I) of coupling strengths, each strictly inside (0, pi)."""

    g_r: float
    g_i: float

    def __post_init__(self):
        for name, g in (("g_r", self.g_r), ("g_i", self.g_i)):
            if not 0.0 < g < np.pi:
                raise StrengthOutOfRange(f"{name} = {g!r} outside the open interval (0, pi)")


@dataclass(frozen=True)
class PointerObservables:
    """The two pointer quadrature observables built at strength g."""

    sigma_r: np.ndarray
    sigma_i: np.ndarray
    g: float


@dataclass(frozen=True)
class ConditionalDeviceEnsemble:
    """Post-selected pointer states for one coupling index n.

    probs[j] is the probability of post-selection outcome j; device_states[j]
    is the normalized 2x2 pointer state, or None when probs[j] <= 1e-12.
    """

    n: int
    g: float
    probs: np.ndarray
    device_states: tuple


@dataclass(frozen=True)
class WeakValueTable:
    """Weak values W[n][j] with their post-selection probabilities P[n][j].

    undefined[n][j] marks entries whose post-selection probability vanished;
    such entries hold 0 and are rejected if reconstruction needs them.
    """

    dim: int
    entries: np.ndarray
    probs: np.ndarray
    undefined: np.ndarray


def fourier_mub(d: int) -> MeasurementBases:
    """Computational basis plus the Fourier basis with <psi_j|a_n> = e^{2pi i jn/d}/sqrt(d)."""
    if d < 2:
        raise InvalidDimension(f"system dimension must be >= 2, got {d}")
    jn = np.outer(np.arange(d), np.arange(d))
    # Components <a_n|psi_j> are the conjugates of the defining overlaps.
    psi = np.exp(-2j * np.pi * jn / d) / np.sqrt(d)
    return MeasurementBases(dim=d, a_basis=np.eye(d, dtype=complex), psi_basis=psi)


def _check_index(n: int, d: int) -> None:
    if not 0 <= n < d:
        raise IndexOutOfRange(f"basis index {n} outside 0..{d - 1}")


def _coupling_from_projector(proj: np.ndarray, g: float) -> np.ndarray:
    # exp(-i g P (x) sigma_x) = (I-P) (x) I + P (x) (cos g I - i sin g sigma_x)
    # exactly, because P (x) sigma_x squares to P (x) I.
    d = proj.shape[0]
    v = np.cos(g) * np.eye(2, dtype=complex) - 1j * np.sin(g) * SIGMA_X
    return np.kron(np.eye(d, dtype=complex) - proj, np.eye(2, dtype=complex)) + np.kron(proj, v)


def coupling_unitary(n: int, g: float, d: int) -> np.ndarray:
    """The 2d x 2d system-pointer coupling unitary for coupling index n."""
    if d < 2:
        raise InvalidDimension(f"system dimension must be >= 2, got {d}")
    _check_index(n, d)
    proj = np.zeros((d, d), dtype=complex)
    proj[n, n] = 1.0
    return _coupling_from_projector(proj, g)


def pointer_observables(g: float) -> PointerObservables:
    """Quadrature observables sigma_R = (g/sin g)[sigma_y - tan(g/2)(I - sigma_z)]
    and sigma_I = (g/sin g) sigma_x."""
    s = np.sin(g)
    half_c = np.cos(g / 2.0)
    if abs(s) < SINGULAR_TOL or abs(half_c) < SINGULAR_TOL:
        raise StrengthOutOfRange(
            f"g = {g!r}: sin(g) = {s:.3e} or cos(g/2) = {half_c:.3e} too close to singular"
        )
    scale = g / s
    sigma_r = scale * (SIGMA_Y - np.tan(g / 2.0) * (np.eye(2, dtype=complex) - SIGMA_Z))
    sigma_i = scale * SIGMA_X
    return PointerObservables(sigma_r=sigma_r, sigma_i=sigma_i, g=g)


def couple_and_postselect(
    rho: DensityMatrix, n: int, g: float, bases: MeasurementBases
) -> ConditionalDeviceEnsemble:
    """Couple to |a_n>, post-select each |psi_j>, return outcome probabilities
    and the conditional pointer states."""
    d = rho.dim
    if bases.dim != d:
        raise ShapeMismatch(f"bases built for d={bases.dim}, state has d={d}")
    _check_index(n, d)

    a_n = bases.a_basis[:, n]
    proj = np.outer(a_n, a_n.conj())
    u = _coupling_from_projector(proj, g)
    joint = u @ np.kron(rho.matrix, DEVICE_ZERO) @ u.conj().T
    # Partial inner product <psi_j| . |psi_j> over the system factor.
    blocks = joint.reshape(d, 2, d, 2)
    m = np.einsum("aj,aibk,bj->jik", bases.psi_basis.conj(), blocks, bases.psi_basis)
    m = (m + np.conj(np.transpose(m, (0, 2, 1)))) / 2.0  # kill rounding asymmetry

    probs = np.einsum("jii->j", m).real
    if probs.min() < -PROB_DEFINED_TOL:
        raise NotPositive(f"post-selection probability {probs.min():.3e} below -1e-12")
    probs = np.where(probs < 0.0, 0.0, probs)
    states = tuple(m[j] / probs[j] if probs[j] > PROB_DEFINED_TOL else None for j in range(d))
    return ConditionalDeviceEnsemble(n=n, g=g, probs=probs, device_states=states)


def weak_values_exact(rho: DensityMatrix, bases: MeasurementBases, g: float) -> WeakValueTable:
    """Definitional weak values W_nj = <psi_j|a_n><a_n|rho|psi_j> / P_j(n),
    with P_j(n) the physical post-selection probability under coupling g."""
    d = rho.dim
    overlaps = bases.overlaps()  # O[j, n] = <psi_j|a_n>
    entries = np.zeros((d, d), dtype=complex)
    probs = np.zeros((d, d))
    undefined = np.zeros((d, d), dtype=bool)
    for n in range(d):
        ens = couple_and_postselect(rho, n, g, bases)
        probs[n] = ens.probs
        a_n = bases.a_basis[:, n]
        # numer[j] = <psi_j|a_n><a_n|rho|psi_j>
        numer = overlaps[:, n] * ((a_n.conj() @ rho.matrix) @ bases.psi_basis)
        defined = ens.probs > PROB_DEFINED_TOL
        entries[n, defined] = numer[defined] / ens.probs[defined]
        undefined[n] = ~defined
    return WeakValueTable(dim=d, entries=entries, probs=probs, undefined=undefined)


def weak_value_from_device(
    ens: ConditionalDeviceEnsemble, obs: PointerObservables
) -> np.ndarray:
    """Weak values read off the pointer: W_j = (1/2g)[-tr(rho_d sigma_R) + i tr(rho_d sigma_I)].

    Entries whose post-selection probability vanished come back as NaN.
    """
    if abs(ens.g - obs.g) > 1e-12:
        raise StrengthMismatch(f"ensemble built at g={ens.g!r}, observables at g={obs.g!r}")
    out = np.full(len(ens.probs), np.nan + 1j * np.nan, dtype=complex)
    for j, state in enumerate(ens.device_states):
        if state is None:
            continue
        re = -np.trace(state @ obs.sigma_r).real
        im = np.trace(state @ obs.sigma_i).real
        out[j] = (re + 1j * im) / (2.0 * ens.g)
    return out


def reconstruct(table: WeakValueTable, bases: MeasurementBases) -> np.ndarray:
    """Assemble rho[n][m] = sum_j P_j(n) (<psi_j|a_m>/<psi_j|a_n>) W_nj."""
    d = table.dim
    if bases.dim != d:
        raise ShapeMismatch(f"bases built for d={bases.dim}, table has d={d}")
    if table.undefined.any():
        n, j = np.argwhere(table.undefined)[0]
        raise UndefinedWeakValue(
            f"weak value undefined at (n={n}, j={j}): post-selection probability vanished"
        )
    overlaps = bases.overlaps()
    out = np.zeros((d, d), dtype=complex)
    for n in range(d):
        pw = table.probs[n] * table.entries[n]
        out[n] = (pw / overlaps[:, n]) @ overlaps
    return out


def marginal_device_state(rho: DensityMatrix, n: int, g: float) -> np.ndarray:
    """Pointer state after coupling to |a_n>, before post-selection
    (partial trace over the system)."""
    d = rho.dim
    _check_index(n, d)
    u = coupling_unitary(n, g, d)
    joint = u @ np.kron(rho.matrix, DEVICE_ZERO) @ u.conj().T
    return np.einsum("aiak->ik", joint.reshape(d, 2, d, 2))
