"""End-to-end acceptance gate.

One test per criterion so `pytest -v` reports one pass/fail line each.
The master seed was fixed before any data was drawn; every statistical
bound below was rehearsed exactly once at this seed and holds with wide
margin (largest rehearsed deviation 2.1 of an allowed 4 stderr).
"""

import time

import numpy as np

from wvtomo import (
    CouplingStrengths,
    RandomStream,
    SufficientStats,
    TheoryInput,
    assemble_estimate,
    couple_and_postselect,
    estimate_pw,
    exact_mse_oracle,
    fourier_mub,
    hs_distance_sq,
    mse_hermitized,
    mse_hermitized_exact,
    mse_raw,
    numeric_optimal_strengths,
    optimal_strengths,
    pointer_observables,
    purity_stats,
    random_mixed,
    random_pure,
    reconstruct,
    run_experiment,
    sample_shots,
    scaled_mse_menu,
    weak_value_from_device,
    weak_values_exact,
)
from wvtomo.cli import STATE_STREAM, main
from wvtomo.montecarlo import _config_distributions

SEED = 20240814

_SHARED = {}


def _desk_experiment():
    """d=5, N=100, 1000 repetitions at the optimal strengths, one pure state.

    Shared between the raw-MSE and hermitized-MSE criteria; the state is the
    same one `wvtomo sweep --pure --seed 20240814` would draw.
    """
    if "report" not in _SHARED:
        rho = random_pure(5, RandomStream(SEED, STATE_STREAM))
        strengths = optimal_strengths(5)
        _SHARED["rho"] = rho
        _SHARED["strengths"] = strengths
        _SHARED["report"] = run_experiment(rho, strengths, 100, 1000, SEED)
    return _SHARED


def test_01_exact_reconstruction_identity():
    """Exact weak values reconstruct the state to HS^2 < 1e-20."""
    t0 = time.monotonic()
    strengths = (0.1, 0.5, 1.0, 1.5, 2.5)
    worst = 0.0
    for i in range(200):
        d = 2 + i % 7
        if i % 2:
            rho = random_pure(d, RandomStream(SEED, 10_000 + i))
        else:
            rho = random_mixed(d, 1 + i % d, RandomStream(SEED, 10_000 + i))
        bases = fourier_mub(d)
        for g in strengths:
            rec = reconstruct(weak_values_exact(rho, bases, g), bases)
            worst = max(worst, hs_distance_sq(rec, rho.matrix))
    assert worst < 1e-20, f"worst HS^2 deviation {worst:.3e}"
    assert time.monotonic() - t0 < 10.0


def test_02_pointer_readout_identity():
    """Device-expectation weak values equal definitional ones within 1e-10."""
    t0 = time.monotonic()
    gs = RandomStream(SEED, 20_000).uniforms(1000)
    worst = 0.0
    for i in range(1000):
        d = 2 + i % 7
        rho = random_mixed(d, 1 + (i // 7) % d, RandomStream(SEED, 21_000 + i))
        n = (i // 49) % d
        g = 0.05 + float(gs[i]) * (np.pi - 0.1)
        bases = fourier_mub(d)
        ens = couple_and_postselect(rho, n, g, bases)
        from_device = weak_value_from_device(ens, pointer_observables(g))
        a_n = bases.a_basis[:, n]
        numer = bases.overlaps()[:, n] * ((a_n.conj() @ rho.matrix) @ bases.psi_basis)
        definitional = numer / ens.probs
        worst = max(worst, float(np.max(np.abs(from_device - definitional))))
    assert worst < 1e-10, f"worst readout deviation {worst:.3e}"
    assert time.monotonic() - t0 < 10.0


def test_03_closed_form_optimum():
    """Closed-form strengths match an independent numeric search to 1e-6."""
    t0 = time.monotonic()
    for d in range(2, 33):
        closed = optimal_strengths(d)
        numeric = numeric_optimal_strengths(d)
        assert abs(closed.g_r - numeric.g_r) < 1e-6, f"d={d}"
        assert abs(closed.g_i - numeric.g_i) < 1e-6, f"d={d}"
        assert closed.g_i == np.pi / 2
    assert abs(optimal_strengths(5).g_r - 1.3342) < 1e-4
    assert time.monotonic() - t0 < 5.0


def _variance_probe_cases():
    for d in range(2, 7):
        for s_i in range(20):
            rho = random_mixed(d, (s_i % d) + 1, RandomStream(SEED, 1000 + 100 * d + s_i))
            for p_i in range(10):
                u = RandomStream(SEED, 5000 + 1000 * d + 100 * s_i + p_i).uniforms(2)
                strengths = CouplingStrengths(
                    0.05 + float(u[0]) * (np.pi - 0.1), 0.05 + float(u[1]) * (np.pi - 0.1)
                )
                yield d, rho, strengths


def test_04a_raw_variance_closed_form():
    """Enumeration oracle equals the raw-MSE closed form within 1e-9."""
    t0 = time.monotonic()
    worst = 0.0
    for d, rho, strengths in _variance_probe_cases():
        inp = TheoryInput(dim=d, strengths=strengths, shots=30, purity=purity_stats(rho))
        worst = max(worst, abs(exact_mse_oracle(rho, strengths, 30) - mse_raw(inp)))
    assert worst < 1e-9, f"worst raw closed-form deviation {worst:.3e}"
    assert time.monotonic() - t0 < 60.0


def test_04b_hermitized_variance_closed_form():
    """Enumeration oracle vs the hermitized closed form within 1e-9.

    The exact-bookkeeping form (mse_hermitized_exact) meets the target; the
    uniform-variance form (mse_hermitized) cannot, because it differs from
    the exact MSE by the state-dependent amount
    [sum_n rho_nn^2/2 - (tr((Re rho)^2) - tr((Im rho)^2))/(2d)]/N,
    around 1e-3 at these sizes.  The second assertion records that honestly.
    """
    t0 = time.monotonic()
    worst_exact = 0.0
    worst_uniform = 0.0
    for d, rho, strengths in _variance_probe_cases():
        oracle = exact_mse_oracle(rho, strengths, 30, hermitized=True)
        worst_exact = max(worst_exact, abs(oracle - mse_hermitized_exact(rho, strengths, 30)))
        inp = TheoryInput(dim=d, strengths=strengths, shots=30, purity=purity_stats(rho))
        worst_uniform = max(worst_uniform, abs(oracle - mse_hermitized(inp).total))
    elapsed = time.monotonic() - t0
    assert worst_exact < 1e-9, f"worst exact-form deviation {worst_exact:.3e}"
    assert elapsed < 60.0
    assert worst_uniform < 1e-9, (
        f"uniform-variance hermitized closed form deviates from the exact oracle "
        f"by up to {worst_uniform:.3e} (exact-bookkeeping form agrees to "
        f"{worst_exact:.3e}); the residual is the documented state-dependent "
        f"approximation gap, so a 1e-9 match is unattainable for generic states"
    )


def test_05_raw_mse_reference_run():
    """Empirical raw MSE (d=5, N=100, 10^3 reps, pure) within 3 stderr of 0.15914."""
    t0 = time.monotonic()
    report = _desk_experiment()["report"]
    # closed-form value for a pure state: (16.914 - 1)/100; rehearsed z = 1.1
    assert abs(report.mse_raw_mean - 0.15914) < 3.0 * report.mse_raw_stderr, (
        f"raw mean {report.mse_raw_mean:.6f} vs 0.15914 "
        f"(stderr {report.mse_raw_stderr:.2e})"
    )
    assert time.monotonic() - t0 < 120.0


def test_06_hermitized_mse_reference_run():
    """Empirical hermitized MSE within 3 stderr of the hermitized closed form."""
    t0 = time.monotonic()
    shared = _desk_experiment()
    report = shared["report"]
    inp = TheoryInput(
        dim=5, strengths=shared["strengths"], shots=100, purity=purity_stats(shared["rho"])
    )
    target = mse_hermitized(inp).total
    assert abs(report.mse_herm_mean - target) < 3.0 * report.mse_herm_stderr, (
        f"hermitized mean {report.mse_herm_mean:.6f} vs {target:.6f} "
        f"(stderr {report.mse_herm_stderr:.2e})"
    )
    assert time.monotonic() - t0 < 120.0


def test_07_scaled_mse_comparison_table():
    """Per-shot hermitized row beats MUB/SIC, per-copy row loses, d=5 row exact."""
    t0 = time.monotonic()
    for d in range(2, 11):
        menu = {r.scheme: r.scaled_mse for r in scaled_mse_menu(d, 1.0, 1.0, 0.0)}
        assert menu["hermitized-per-shot-approx"] < menu["mub"], f"d={d}"
        assert menu["hermitized-per-shot-approx"] < menu["sic"], f"d={d}"
        assert menu["per-copy-approx"] > menu["mub"], f"d={d}"
        assert menu["per-copy-approx"] > menu["sic"], f"d={d}"
    d5 = {r.scheme: r.scaled_mse for r in scaled_mse_menu(5, 1.0, 1.0, 0.0)}
    assert d5["mub"] == 24.0
    assert d5["sic"] == 28.0
    assert time.monotonic() - t0 < 1.0


def test_08_elementwise_unbiasedness():
    """Mean of 10^4 raw estimates (d=3, N=50) within 4 stderr, elementwise."""
    t0 = time.monotonic()
    d, n_shots, reps = 3, 50, 10_000
    rho = random_mixed(d, d, RandomStream(SEED, STATE_STREAM + 1))
    strengths = optimal_strengths(d)
    bases = fourier_mub(d)
    dists = _config_distributions(rho, strengths, bases)
    estimates = np.zeros((reps, d, d), dtype=complex)
    for rep in range(reps):
        stream = RandomStream(SEED, rep)
        stats = SufficientStats(dim=d, shots=n_shots)
        for dist in dists:
            stats.record(dist.n, dist.quadrature, sample_shots(dist, n_shots, stream))
        estimates[rep] = assemble_estimate(
            estimate_pw(stats, strengths), bases, strengths, n_shots, SEED
        ).raw
    mean = estimates.mean(axis=0)
    se_re = estimates.real.std(axis=0, ddof=1) / np.sqrt(reps)
    se_im = estimates.imag.std(axis=0, ddof=1) / np.sqrt(reps)
    z = np.concatenate([
        (np.abs(mean.real - rho.matrix.real) / se_re).ravel(),
        (np.abs(mean.imag - rho.matrix.imag) / se_im).ravel(),
    ])
    frac = np.mean(z <= 4.0)
    assert frac >= 0.95, f"only {frac:.0%} of element checks within 4 stderr (max z {z.max():.2f})"
    assert time.monotonic() - t0 < 60.0


def test_09_byte_identical_outputs(tmp_path, capsys):
    """Identical seeds produce byte-identical CSV files."""
    sweep_args = [
        "sweep", "--dim", "3", "--shots", "20", "--reps", "5",
        "--seed", str(SEED), "--sweep-steps", "3",
    ]
    compare_args = ["compare", "--seed", str(SEED)]
    for args, name in ((sweep_args, "sweep"), (compare_args, "compare")):
        a, b = tmp_path / f"{name}_a.csv", tmp_path / f"{name}_b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_bytes()) > 0
    capsys.readouterr()
