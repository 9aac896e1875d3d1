"""Command-line harness: strength sweeps, scheme comparison tables,
single-shot reconstruction, and an internal consistency selfcheck.

Output is CSV (12 significant digits, deterministic for a fixed seed),
plus an optional manifest recording every resolved setting and the drawn
state.  Exit codes: 0 ok, 2 bad config, 3 bad input file, 4 internal
consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import theory
from .errors import StateFileError, TomographyError
from .montecarlo import exact_mse_oracle, run_experiment
from .protocol import CouplingStrengths, fourier_mub
from .qmath import DensityMatrix, hs_distance_sq, purity_stats, random_mixed, random_pure, validate_density
from .rng import RandomStream
from .statefile import read_state_file, write_state_file

# Stream ids: repetitions use 0..reps-1 inside run_experiment; state draws and
# one-off simulations live far away so they never collide.
STATE_STREAM = 2**32
RECONSTRUCT_STREAM = 2**33

DEFAULTS = {
    "dim": 5,
    "shots": 100,
    "reps": 1000,
    "seed": 1,
    "g_r": None,
    "g_i": None,
    "optimal": False,
    "sweep_axis": "g_r",
    "sweep_min": 0.6,
    "sweep_max": 2.4,
    "sweep_steps": 19,
    "state_file": None,
    "pure": False,
    "mixed_rank": None,
    "dim_min": 2,
    "dim_max": 10,
    "out": "-",
    "manifest": None,
}


class ConfigError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(out: str, header: list, rows: list) -> None:
    if out == "-":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_fmt(x) for x in row] for row in rows])
        return
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_fmt(x) for x in row] for row in rows])


def _write_manifest(path, entries: list) -> None:
    if path is None:
        return
    Path(path).write_text("".join(f"{k} = {_fmt(v)}\n" for k, v in entries))


def _resolve(args: argparse.Namespace) -> dict:
    """Merge built-in defaults, --config file values, and explicit flags
    (flags win)."""
    cfg = dict(DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except OSError as exc:
            raise StateFileError(f"cannot read config file {config_path}: {exc}")
        except json.JSONDecodeError as exc:
            raise StateFileError(f"config file {config_path} is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {config_path} must hold a JSON object")
        for key, val in loaded.items():
            if key not in cfg:
                raise ConfigError(f"config file {config_path}: unknown key {key!r}")
            cfg[key] = val
    for key in cfg:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            cfg[key] = flag_val
    return cfg


def _positive(cfg: dict, key: str, minimum: int) -> int:
    val = cfg[key]
    try:
        val = int(val)
    except (TypeError, ValueError):
        raise ConfigError(f"--{key.replace('_', '-')} must be an integer, got {val!r}")
    if val < minimum:
        raise ConfigError(f"--{key.replace('_', '-')} must be >= {minimum}, got {val}")
    return val


def _load_state(cfg: dict, dim: int, stream: RandomStream) -> tuple[DensityMatrix, str]:
    sources = [cfg["state_file"] is not None, bool(cfg["pure"]), cfg["mixed_rank"] is not None]
    if sum(sources) > 1:
        raise ConfigError("--state-file, --pure and --mixed-rank are mutually exclusive")
    if cfg["state_file"] is not None:
        rho = validate_density(read_state_file(cfg["state_file"]))
        if rho.dim != dim:
            raise ConfigError(
                f"--state-file holds a d={rho.dim} state but the configured dimension is {dim}"
            )
        return rho, f"file:{cfg['state_file']}"
    if cfg["mixed_rank"] is not None:
        rank = _positive(cfg, "mixed_rank", 1)
        if rank > dim:
            raise ConfigError(f"--mixed-rank must be <= dim={dim}, got {rank}")
        return random_mixed(dim, rank, stream), f"mixed-random:rank={rank}"
    return random_pure(dim, stream), "pure-random"


def _fixed_strengths(cfg: dict, dim: int) -> CouplingStrengths:
    opt = theory.optimal_strengths(dim)
    if cfg["optimal"]:
        if cfg["g_r"] is not None or cfg["g_i"] is not None:
            raise ConfigError("--optimal conflicts with explicit --g-r/--g-i")
        return opt
    g_r = float(cfg["g_r"]) if cfg["g_r"] is not None else opt.g_r
    g_i = float(cfg["g_i"]) if cfg["g_i"] is not None else float(np.pi / 2)
    try:
        return CouplingStrengths(g_r, g_i)
    except TomographyError as exc:
        raise ConfigError(str(exc))


def _state_manifest(rho: DensityMatrix, source: str) -> list:
    pur = purity_stats(rho)
    return [
        ("state_source", source),
        ("purity", pur.purity),
        ("purity_re", pur.purity_re),
        ("purity_im", pur.purity_im),
    ]


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    dim = _positive(cfg, "dim", 2)
    shots = _positive(cfg, "shots", 1)
    reps = _positive(cfg, "reps", 1)
    seed = int(cfg["seed"])
    axis = cfg["sweep_axis"]
    if axis not in ("g_r", "g_i"):
        raise ConfigError(f"--sweep-axis must be g_r or g_i, got {axis!r}")
    steps = _positive(cfg, "sweep_steps", 2)
    lo, hi = float(cfg["sweep_min"]), float(cfg["sweep_max"])
    if not (0.0 < lo < hi < np.pi):
        raise ConfigError(f"sweep range [{lo}, {hi}] must satisfy 0 < min < max < pi")

    rho, source = _load_state(cfg, dim, RandomStream(seed, STATE_STREAM))
    fixed = _fixed_strengths(cfg, dim)

    rows = []
    for value in np.linspace(lo, hi, steps):
        strengths = (
            CouplingStrengths(float(value), fixed.g_i)
            if axis == "g_r"
            else CouplingStrengths(fixed.g_r, float(value))
        )
        report = run_experiment(rho, strengths, shots, reps, seed)
        rows.append(
            [
                value,
                report.mse_raw_mean,
                report.mse_raw_stderr,
                report.mse_herm_mean,
                report.mse_herm_stderr,
                report.theory_raw,
                report.theory_herm,
                exact_mse_oracle(rho, strengths, shots),
                exact_mse_oracle(rho, strengths, shots, hermitized=True),
            ]
        )
    header = [
        axis,
        "mse_raw_mean",
        "mse_raw_stderr",
        "mse_herm_mean",
        "mse_herm_stderr",
        "theory_raw",
        "theory_herm",
        "oracle_raw",
        "oracle_herm",
    ]
    _write_csv(cfg["out"], header, rows)
    _write_manifest(
        cfg["manifest"],
        [("command", "sweep")]
        + [(k, cfg[k]) for k in ("dim", "shots", "reps", "seed")]
        + [
            ("sweep_axis", axis),
            ("sweep_min", lo),
            ("sweep_max", hi),
            ("sweep_steps", steps),
            ("fixed_g_r", fixed.g_r),
            ("fixed_g_i", fixed.g_i),
        ]
        + _state_manifest(rho, source),
    )
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    d_lo = _positive(cfg, "dim_min", 2)
    d_hi = _positive(cfg, "dim_max", 2)
    if d_lo > d_hi:
        raise ConfigError(f"--dim-min {d_lo} exceeds --dim-max {d_hi}")
    if cfg["state_file"] is not None and d_lo != d_hi:
        raise ConfigError("--state-file fixes one dimension; use --dim-min == --dim-max with it")
    seed = int(cfg["seed"])

    schemes = [
        "raw-per-shot",
        "hermitized-per-shot-approx",
        "hermitized-per-shot-exact",
        "per-copy-approx",
        "mub",
        "sic",
    ]
    rows = []
    manifest_states = []
    for d in range(d_lo, d_hi + 1):
        rho, source = _load_state(cfg, d, RandomStream(seed, STATE_STREAM + d))
        pur = purity_stats(rho)
        menu = {row.scheme: row.scaled_mse for row in theory.scaled_mse_menu(
            d, pur.purity, pur.purity_re, pur.purity_im
        )}
        rows.append([d] + [menu[s] for s in schemes])
        manifest_states.append((f"purity_d{d}", pur.purity))
    _write_csv(cfg["out"], ["dim"] + [s.replace("-", "_") for s in schemes], rows)
    _write_manifest(
        cfg["manifest"],
        [("command", "compare"), ("dim_min", d_lo), ("dim_max", d_hi), ("seed", seed)]
        + manifest_states,
    )
    return 0


def cmd_reconstruct(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    if cfg["state_file"] is None:
        raise ConfigError("reconstruct requires --state-file")
    shots = _positive(cfg, "shots", 1)
    seed = int(cfg["seed"])
    rho = validate_density(read_state_file(cfg["state_file"]))
    dim = rho.dim
    strengths = _fixed_strengths(cfg, dim)

    # One full experiment repetition on its own stream.
    from .montecarlo import SufficientStats, assemble_estimate, estimate_pw, _config_distributions, sample_shots

    bases = fourier_mub(dim)
    stream = RandomStream(seed, RECONSTRUCT_STREAM)
    stats = SufficientStats(dim=dim, shots=shots)
    for dist in _config_distributions(rho, strengths, bases):
        stats.record(dist.n, dist.quadrature, sample_shots(dist, shots, stream))
    est = assemble_estimate(estimate_pw(stats, strengths), bases, strengths, shots, seed)

    out = cfg["out"] if cfg["out"] != "-" else "reconstruction"
    raw_path, herm_path = f"{out}_raw.state", f"{out}_herm.state"
    write_state_file(raw_path, est.raw)
    write_state_file(herm_path, est.hermitized)

    pur = purity_stats(rho)
    inp = theory.TheoryInput(dim=dim, strengths=strengths, shots=shots, purity=pur)
    print(f"wrote {raw_path} and {herm_path}")
    print(f"hs_sq_raw = {_fmt(hs_distance_sq(est.raw, rho.matrix))}")
    print(f"hs_sq_herm = {_fmt(hs_distance_sq(est.hermitized, rho.matrix))}")
    print(f"theory_mse_raw = {_fmt(theory.mse_raw(inp))}")
    print(f"theory_mse_herm = {_fmt(theory.mse_hermitized(inp).total)}")
    _write_manifest(
        cfg["manifest"],
        [("command", "reconstruct"), ("dim", dim), ("shots", shots), ("seed", seed),
         ("g_r", strengths.g_r), ("g_i", strengths.g_i)]
        + _state_manifest(rho, f"file:{cfg['state_file']}"),
    )
    return 0


def _selfcheck_probes(seed: int):
    from .montecarlo import exact_mse_oracle
    from .protocol import couple_and_postselect, pointer_observables, weak_value_from_device, weak_values_exact, reconstruct

    checks = []

    dev = 0.0
    for d in (2, 3, 4, 5):
        rho = random_mixed(d, d, RandomStream(seed, 100 + d))
        bases = fourier_mub(d)
        for g in (0.7, 1.9):
            rec = reconstruct(weak_values_exact(rho, bases, g), bases)
            dev = max(dev, hs_distance_sq(rec, rho.matrix))
    checks.append(("exact-reconstruction", dev, 1e-20))

    dev = 0.0
    for d in (2, 3, 5):
        rho = random_mixed(d, d, RandomStream(seed, 200 + d))
        bases = fourier_mub(d)
        for g in np.linspace(0.1, 3.0, 10):
            obs = pointer_observables(g)
            table = weak_values_exact(rho, bases, g)
            for n in range(d):
                ens = couple_and_postselect(rho, n, g, bases)
                w = weak_value_from_device(ens, obs)
                dev = max(dev, float(np.max(np.abs(w - table.entries[n]))))
    checks.append(("readout-identity", dev, 1e-10))

    dev = 0.0
    for d in (2, 3, 5, 12, 32):
        a, b = theory.optimal_strengths(d), theory.numeric_optimal_strengths(d)
        dev = max(dev, abs(a.g_r - b.g_r), abs(a.g_i - b.g_i))
    checks.append(("optimum-agreement", dev, 1e-6))

    dev = 0.0
    for d in range(2, 33):
        opt = theory.optimal_strengths(d)
        rho = random_mixed(d, d, RandomStream(seed, 300 + d))
        pur = purity_stats(rho)
        inp = theory.TheoryInput(dim=d, strengths=opt, shots=7, purity=pur)
        dev = max(dev, abs(theory.mse_raw(inp) - theory.mse_raw_optimal(d, 7, pur.purity)))
        dev = max(
            dev,
            abs(
                theory.mse_hermitized(inp).total
                - theory.mse_hermitized_optimal(d, 7, pur.purity_re, pur.purity_im)
            ),
        )
    checks.append(("substitution-identities", dev, 1e-12))

    dev_raw = dev_herm = dev_gap = 0.0
    probe_gap = None
    for d in (2, 3, 4):
        for k in range(3):
            rho = random_mixed(d, max(1, d - k % 2), RandomStream(seed, 400 + 10 * d + k))
            st = CouplingStrengths(0.35 + 0.5 * k, 2.2 - 0.4 * k)
            pur = purity_stats(rho)
            inp = theory.TheoryInput(dim=d, strengths=st, shots=25, purity=pur)
            o_raw = exact_mse_oracle(rho, st, 25)
            o_herm = exact_mse_oracle(rho, st, 25, hermitized=True)
            dev_raw = max(dev_raw, abs(o_raw - theory.mse_raw(inp)))
            dev_herm = max(dev_herm, abs(o_herm - theory.mse_hermitized_exact(rho, st, 25)))
            diag_sq = float(np.sum(rho.matrix.diagonal().real ** 2))
            predicted_gap = (diag_sq / 2.0 - (pur.purity_re - pur.purity_im) / (2.0 * d)) / 25.0
            gap = theory.mse_hermitized(inp).total - o_herm
            dev_gap = max(dev_gap, abs(gap - predicted_gap))
            probe_gap = gap
    checks.append(("raw-variance-oracle", dev_raw, 1e-9))
    checks.append(("hermitized-variance-oracle-exact-form", dev_herm, 1e-9))
    checks.append(("hermitized-approx-gap-characterized", dev_gap, 1e-12))
    return checks, probe_gap


def cmd_selfcheck(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    checks, probe_gap = _selfcheck_probes(int(cfg["seed"]))
    failed = False
    for name, dev, tol in checks:
        ok = dev <= tol
        failed = failed or not ok
        print(f"{'PASS' if ok else 'FAIL'} {name:40s} max dev {dev:.3e} (tol {tol:.0e})")
    print(
        "INFO uniform-variance hermitized closed form sits "
        f"{probe_gap:+.3e} away from the exact MSE on the last probe; the gap "
        "is state-dependent and matches its closed form (gated above)."
    )
    return 4 if failed else 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with defaults; flags override", default=None)
    p.add_argument("--dim", type=int, default=None, help="system dimension d")
    p.add_argument("--shots", type=int, default=None, help="shots N per configuration")
    p.add_argument("--reps", type=int, default=None, help="experiment repetitions")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--g-r", dest="g_r", type=float, default=None, help="real-part strength")
    p.add_argument("--g-i", dest="g_i", type=float, default=None, help="imaginary-part strength")
    p.add_argument("--optimal", action="store_const", const=True, default=None,
                   help="use the closed-form optimal strengths")
    p.add_argument("--state-file", default=None, help="read the true state from a file")
    p.add_argument("--pure", action="store_const", const=True, default=None,
                   help="draw a Haar-random pure state (default)")
    p.add_argument("--mixed-rank", dest="mixed_rank", type=int, default=None,
                   help="draw a random mixed state of this rank")
    p.add_argument("--out", default=None, help="output path ('-' = stdout)")
    p.add_argument("--manifest", default=None, help="also write a run manifest here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wvtomo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="MSE vs coupling strength (CSV)")
    _add_common(p)
    p.add_argument("--sweep-axis", dest="sweep_axis", choices=("g_r", "g_i"), default=None)
    p.add_argument("--sweep-min", dest="sweep_min", type=float, default=None)
    p.add_argument("--sweep-max", dest="sweep_max", type=float, default=None)
    p.add_argument("--sweep-steps", dest="sweep_steps", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="scaled-MSE table vs MUB/SIC (CSV)")
    _add_common(p)
    p.add_argument("--dim-min", dest="dim_min", type=int, default=None)
    p.add_argument("--dim-max", dest="dim_max", type=int, default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("reconstruct", help="single-run estimate of a state file")
    _add_common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("selfcheck", help="oracle-vs-theory consistency suite")
    _add_common(p)
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StateFileError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    except TomographyError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
