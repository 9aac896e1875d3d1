"""Shot-level simulation of the tomography experiment and its exact
error analysis.

One "measurement" consumes one shot of each of the 2d configurations
(d coupling indices x 2 pointer quadratures); N shots per configuration
means 2dN state copies.  Outcomes are sampled by inverse CDF over the
enumerated 2d-point joint law of (post-selection j, pointer eigenvalue).

`exact_mse_oracle` computes the estimator's mean-square error with no
sampling at all, by propagating exact per-shot covariances through the
linear reconstruction map.  It is the arbiter the closed-form theory is
tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import theory
from .errors import IncompleteStats, NotPositive
from .protocol import (
    CouplingStrengths,
    MeasurementBases,
    couple_and_postselect,
    fourier_mub,
    pointer_observables,
)
from .qmath import DensityMatrix, eig_hermitian_2x2, hs_distance_sq, purity_stats
from .rng import RandomStream

QUADRATURES = ("R", "I")


@dataclass(frozen=True)
class OutcomeDistribution:
    """Joint law of (j, k): post-selection outcome j and pointer eigenvalue
    lambda_k of the chosen quadrature observable.

    Support ordering is fixed: index 2j+k with j ascending, then k ascending
    (eigenvalues sorted ascending within each j).
    """

    n: int
    quadrature: str
    g: float
    probs: np.ndarray   # length 2d
    values: np.ndarray  # length 2d, the eigenvalue drawn at each support point


@dataclass
class SufficientStats:
    """Per-(n, quadrature, j) running sums of observed pointer eigenvalues."""

    dim: int
    shots: int
    sums_r: np.ndarray = field(default=None)
    sums_i: np.ndarray = field(default=None)
    _filled_r: np.ndarray = field(default=None)
    _filled_i: np.ndarray = field(default=None)

    def __post_init__(self):
        d = self.dim
        if self.sums_r is None:
            self.sums_r = np.zeros((d, d))
        if self.sums_i is None:
            self.sums_i = np.zeros((d, d))
        if self._filled_r is None:
            self._filled_r = np.zeros(d, dtype=bool)
        if self._filled_i is None:
            self._filled_i = np.zeros(d, dtype=bool)

    def record(self, n: int, quadrature: str, sums: np.ndarray) -> None:
        if quadrature == "R":
            self.sums_r[n] = sums
            self._filled_r[n] = True
        elif quadrature == "I":
            self.sums_i[n] = sums
            self._filled_i[n] = True
        else:
            raise ValueError(f"quadrature must be 'R' or 'I', got {quadrature!r}")

    @property
    def complete(self) -> bool:
        return bool(self._filled_r.all() and self._filled_i.all())


@dataclass(frozen=True)
class TomographyEstimate:
    raw: np.ndarray
    hermitized: np.ndarray
    strengths: CouplingStrengths
    shots: int
    seed: int


@dataclass(frozen=True)
class MseReport:
    mse_raw_mean: float
    mse_raw_stderr: float
    mse_herm_mean: float
    mse_herm_stderr: float
    reps: int
    theory_raw: float
    theory_herm: float


def outcome_distribution(
    rho: DensityMatrix, n: int, quadrature: str, g: float, bases: MeasurementBases
) -> OutcomeDistribution:
    """Enumerate prob(j,k) = P_j <v_k|rho_d^{nj}|v_k> and the drawn eigenvalues."""
    if quadrature not in QUADRATURES:
        raise ValueError(f"quadrature must be 'R' or 'I', got {quadrature!r}")
    obs = pointer_observables(g)
    sigma = obs.sigma_r if quadrature == "R" else obs.sigma_i
    evals, evecs = eig_hermitian_2x2(sigma)
    ens = couple_and_postselect(rho, n, g, bases)

    d = rho.dim
    probs = np.zeros(2 * d)
    values = np.tile(evals, d)
    for j, state in enumerate(ens.device_states):
        if state is None:
            continue
        branch = np.einsum("ik,ik->k", evecs.conj(), state @ evecs).real
        probs[2 * j : 2 * j + 2] = ens.probs[j] * branch
    if probs.min() < -1e-12:
        raise NotPositive(f"outcome probability {probs.min():.3e} below -1e-12")
    probs = np.where(probs < 0.0, 0.0, probs)
    probs = probs / probs.sum()
    return OutcomeDistribution(n=n, quadrature=quadrature, g=g, probs=probs, values=values)


def sample_shots(dist: OutcomeDistribution, n_shots: int, rng: RandomStream) -> np.ndarray:
    """Draw n_shots outcomes by inverse CDF; return per-j sums of observed eigenvalues."""
    if n_shots < 1:
        raise ValueError(f"shot count must be >= 1, got {n_shots}")
    d = len(dist.probs) // 2
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0  # guard the top edge against rounding
    idx = np.searchsorted(cdf, rng.uniforms(n_shots), side="right")
    return np.bincount(idx >> 1, weights=dist.values[idx], minlength=d)


def estimate_pw(stats: SufficientStats, strengths: CouplingStrengths) -> np.ndarray:
    """Unbiased estimates of P_j W_nj: (1/2)[-avg_R(j)/g_R + i avg_I(j)/g_I],
    where each average divides by the full shot count N."""
    if not stats.complete:
        raise IncompleteStats("sufficient statistics missing one or more (n, quadrature) configs")
    avg_r = stats.sums_r / stats.shots
    avg_i = stats.sums_i / stats.shots
    return -avg_r / (2.0 * strengths.g_r) + 1j * avg_i / (2.0 * strengths.g_i)


def assemble_estimate(
    pw_table: np.ndarray,
    bases: MeasurementBases,
    strengths: CouplingStrengths,
    shots: int,
    seed: int,
) -> TomographyEstimate:
    """Linear reconstruction raw[n][m] = sum_j (<psi_j|a_m>/<psi_j|a_n>) pw[n][j],
    plus the hermitized combination (raw + raw^dag)/2."""
    d = bases.dim
    overlaps = bases.overlaps()
    raw = np.zeros((d, d), dtype=complex)
    for n in range(d):
        raw[n] = (pw_table[n] / overlaps[:, n]) @ overlaps
    hermitized = (raw + raw.conj().T) / 2.0
    return TomographyEstimate(
        raw=raw, hermitized=hermitized, strengths=strengths, shots=shots, seed=seed
    )


def _config_distributions(
    rho: DensityMatrix, strengths: CouplingStrengths, bases: MeasurementBases
) -> list:
    """The 2d outcome distributions in fixed order: n ascending, R before I."""
    out = []
    for n in range(rho.dim):
        out.append(outcome_distribution(rho, n, "R", strengths.g_r, bases))
        out.append(outcome_distribution(rho, n, "I", strengths.g_i, bases))
    return out


def run_experiment(
    rho: DensityMatrix,
    strengths: CouplingStrengths,
    n_shots: int,
    reps: int,
    seed: int,
) -> MseReport:
    """Repeat the full 2d-configuration experiment `reps` times and report the
    empirical MSE of the raw and hermitized estimators, with theory values
    for the same configuration attached."""
    d = rho.dim
    bases = fourier_mub(d)
    dists = _config_distributions(rho, strengths, bases)

    err_raw = np.zeros(reps)
    err_herm = np.zeros(reps)
    for rep in range(reps):
        stream = RandomStream(seed, rep)
        stats = SufficientStats(dim=d, shots=n_shots)
        for dist in dists:
            stats.record(dist.n, dist.quadrature, sample_shots(dist, n_shots, stream))
        pw = estimate_pw(stats, strengths)
        est = assemble_estimate(pw, bases, strengths, n_shots, seed)
        err_raw[rep] = hs_distance_sq(est.raw, rho.matrix)
        err_herm[rep] = hs_distance_sq(est.hermitized, rho.matrix)

    stats_input = theory.TheoryInput(
        dim=d, strengths=strengths, shots=n_shots, purity=purity_stats(rho)
    )
    return MseReport(
        mse_raw_mean=float(err_raw.mean()),
        mse_raw_stderr=float(err_raw.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0,
        mse_herm_mean=float(err_herm.mean()),
        mse_herm_stderr=float(err_herm.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0,
        reps=reps,
        theory_raw=theory.mse_raw(stats_input),
        theory_herm=theory.mse_hermitized(stats_input).total,
    )


def _row_covariances(
    rho: DensityMatrix, n: int, strengths: CouplingStrengths, bases: MeasurementBases
) -> tuple[np.ndarray, np.ndarray]:
    """Per-shot covariance matrices over j of the real-part and imaginary-part
    estimator variables for coupling index n."""
    covs = []
    for quadrature, g, sign in (("R", strengths.g_r, -1.0), ("I", strengths.g_i, +1.0)):
        dist = outcome_distribution(rho, n, quadrature, g, bases)
        p = dist.probs.reshape(-1, 2)
        v = dist.values.reshape(-1, 2)
        # Per-shot variable for slot j is sign * lambda * 1{j} / (2g); different
        # slots share the one multinomial draw, hence the -mu mu^T coupling.
        m1 = (p * v).sum(axis=1)
        m2 = (p * v * v).sum(axis=1)
        mu = sign * m1 / (2.0 * g)
        second = m2 / (4.0 * g * g)
        covs.append(np.diag(second) - np.outer(mu, mu))
    return covs[0], covs[1]


def exact_mse_oracle(
    rho: DensityMatrix, strengths: CouplingStrengths, n_shots: int, hermitized: bool = False
) -> float:
    """Exact MSE of the estimator, by enumeration instead of sampling.

    Propagates the per-shot covariances through the reconstruction row
    rho[n][m] = sum_j c_jm (X_j + i Y_j), c_jm = <psi_j|a_m>/<psi_j|a_n>,
    carrying the cross-j covariance within each row exactly.  Rows with
    different n come from disjoint shots and are independent.
    """
    d = rho.dim
    bases = fourier_mub(d)
    overlaps = bases.overlaps()
    var_elem = np.zeros((d, d))   # per-shot E|rho_hat[n,m] - rho[n,m]|^2
    var_rediag = np.zeros(d)      # per-shot Var(Re rho_hat[n,n])
    for n in range(d):
        cov_x, cov_y = _row_covariances(rho, n, strengths, bases)
        coeff = overlaps / overlaps[:, n][:, None]  # coeff[j, m]
        var_elem[n] = np.einsum("jm,jk,km->m", coeff.conj(), cov_x + cov_y, coeff).real
        # At m=n every coefficient is 1, so Re rho_hat[n,n] = sum_j X_j.
        var_rediag[n] = cov_x.sum()

    if not hermitized:
        return float(var_elem.sum() / n_shots)
    off = (var_elem.sum() - np.trace(var_elem)) / 2.0  # averaging independent rows halves it
    return float((off + var_rediag.sum()) / n_shots)
