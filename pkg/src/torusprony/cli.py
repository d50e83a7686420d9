"""Command-line front end: constants table, certificates, figure grids,
simulated recovery experiments and rank sweeps.

Exit codes: 0 success, 1 usage error, 2 structured recovery failure.
The environment variable PRONY_TOL overrides the default relative rank
tolerance for every subcommand.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ensemble import DiracEnsemble, canonicalize, separation, wrap_distance_arrays
from .ingham import (
    PsiSpec,
    build_certificate,
    constant_cd,
    eval_psi,
    eval_psi_hat,
    log_bound_cd,
    window_for_order,
)
from .moments import (
    DEFAULT_RANK_RTOL,
    MomentTable,
    build_toeplitz,
    build_vandermonde,
    compute_moments,
    numerical_rank,
)
from .prony import RecoveryError, full_pipeline, kernel_basis

USAGE_ERROR = 1
RECOVERY_FAILURE = 2


class UsageError(ValueError):
    """Invalid parameter combination; maps to exit code 1."""


@dataclass
class ExperimentConfig:
    """Parsed invocation of one subcommand; the seed pins all randomness."""

    mode: str
    d: int = 2
    n: int = 8
    p: int = 2
    q: float = 0.1
    m: int = 3
    seed: int = 0
    variant: str | None = None
    which: str = "psi"
    resolution: int = 101
    d_list: tuple = ()
    n_max: int = 6
    moments_path: str | None = None
    truth_path: str | None = None
    ensemble_path: str | None = None
    out: str | None = None
    export_moments: str | None = None
    export_ensemble: str | None = None
    rel_tol: float = DEFAULT_RANK_RTOL
    extra: dict = field(default_factory=dict)


def generate_separated_ensemble(
    d: int,
    m: int,
    q_target: float,
    rng: np.random.Generator,
    coeff_bounds: tuple = (0.5, 2.0),
    max_attempts: int = 100_000,
) -> DiracEnsemble:
    """Rejection-sample m points with pairwise wrap separation >= q_target.

    Coefficients get moduli uniform in coeff_bounds and uniform phases.
    Raises UsageError when the packing cap is exhausted.
    """
    if not 0 < q_target <= 0.5:
        raise UsageError("q must lie in (0, 0.5]")
    if m < 1:
        raise UsageError("m must be >= 1")
    accepted: list = []
    attempts = 0
    while len(accepted) < m:
        if attempts >= max_attempts:
            raise UsageError(
                f"could not pack {m} points with separation {q_target} in "
                f"[0,1)^{d} after {max_attempts} draws"
            )
        candidate = rng.random(d)
        attempts += 1
        if accepted:
            dist = wrap_distance_arrays(np.array(accepted), candidate).min()
            if dist < q_target:
                continue
        accepted.append(candidate)
    moduli = rng.uniform(*coeff_bounds, size=m)
    phases = rng.uniform(0.0, 2 * np.pi, size=m)
    coeffs = moduli * np.exp(1j * phases)
    return DiracEnsemble(
        points=tuple(canonicalize(p) for p in accepted),
        coefficients=tuple(coeffs),
    )


def cmd_constants(config: ExperimentConfig) -> int:
    """Print the dimension constants with winning construction and log bound."""
    d_list = config.d_list or (1, 2, 3, 4, 10, 16, 20, 64, 100, 256)
    rows = []
    for d in d_list:
        info = constant_cd(int(d))
        _, statement = log_bound_cd(int(d))
        rows.append((info.d, info.c_d, info.construction, info.C_p, statement))
    header = f"{'d':>5}  {'c_d':>7}  {'construction':<14}  {'base C_p':>9}  {'3+2 log d':>10}"
    print(header)
    for d, cd, label, base, bound in rows:
        print(f"{d:>5}  {cd:>7.4f}  {label:<14}  {base:>9.5f}  {bound:>10.4f}")
    if config.out:
        with open(config.out, "w") as fh:
            fh.write("d,c_d,construction,base_constant,log_bound\n")
            for d, cd, label, base, bound in rows:
                fh.write(f"{d},{cd!r},{label},{base!r},{bound!r}\n")
    return 0


def cmd_certify(config: ExperimentConfig) -> int:
    """Build and print the certificate for one (d, p, q, n) choice."""
    if not 0 < config.q <= 0.5:
        raise UsageError("q must lie in (0, 0.5]")
    if config.n <= 0:
        raise UsageError("n must be positive")
    window = window_for_order(config.p, config.q, variant=config.variant)
    spec = PsiSpec.for_window(window, d=config.d, n=config.n)
    cert = build_certificate(spec)
    print(f"variant        : {cert.variant} (p={cert.p})")
    print(f"d, n, q        : {cert.d}, {cert.n}, {cert.q}")
    print(f"psi(0)         : {cert.psi_zero:.6e}")
    print(f"max psi_hat    : {cert.psi_hat_max:.6e}")
    print(f"threshold nq   : {cert.threshold_nq:.6f} (nq = {cert.n * cert.q:.6f})")
    print(f"lower bound c  : {cert.lower_bound_c:.6e}")
    print(f"sign check     : {'pass' if cert.sign_check else 'fail'}")
    print(f"certified      : {'yes' if cert.certified else 'no (psi(0) <= 0)'}")
    if config.out:
        cert.save(config.out)
    return 0


def _boundary_path(out: str) -> Path:
    return Path(out).with_suffix(".boundary.csv")


def cmd_window_grid(config: ExperimentConfig) -> int:
    """Emit a CSV evaluation grid of psi or psi_hat plus the reference boundary.

    psi grids cover [-1.5q, 1.5q] per axis (support boundary: the square of
    half-width q); psi_hat grids cover [-2n, 2n] (boundary: the l^p ball of
    radius n).  Data is row-major with the last axis fastest.
    """
    if config.out is None:
        raise UsageError("window-grid requires --out")
    if config.which not in ("psi", "psi_hat"):
        raise UsageError("--which must be psi or psi_hat")
    if not 0 < config.q <= 0.5:
        raise UsageError("q must lie in (0, 0.5]")
    window = window_for_order(config.p, config.q, variant=config.variant)
    spec = PsiSpec.for_window(window, d=config.d, n=config.n)
    res = config.resolution
    naxes = min(config.d, 2)
    if config.which == "psi":
        lim = 1.5 * config.q
    else:
        lim = 2.0 * config.n
    axis = np.linspace(-lim, lim, res)
    grids = np.meshgrid(*([axis] * naxes), indexing="ij")
    points = np.zeros(grids[0].shape + (config.d,))
    for s in range(naxes):
        points[..., s] = grids[s]
    flat = points.reshape(-1, config.d)
    if config.which == "psi":
        values = np.array([eval_psi(spec, x) for x in flat])
    else:
        values = np.asarray(eval_psi_hat(spec, flat))
    with open(config.out, "w") as fh:
        fh.write(",".join(f"x{s + 1}" for s in range(config.d)) + ",value\n")
        for x, v in zip(flat, values):
            fh.write(",".join(repr(float(c)) for c in x) + f",{float(v)!r}\n")

    boundary = _boundary_path(config.out)
    with open(boundary, "w") as fh:
        fh.write(",".join(f"x{s + 1}" for s in range(min(config.d, 2))) + "\n")
        if config.which == "psi":
            if naxes == 1:
                pts = [(-config.q,), (config.q,)]
            else:
                qq = config.q
                pts = [(-qq, -qq), (qq, -qq), (qq, qq), (-qq, qq), (-qq, -qq)]
        else:
            if naxes == 1:
                pts = [(-config.n,), (config.n,)]
            else:
                theta = np.linspace(0.0, 2 * np.pi, 721)
                expo = 2.0 / config.p
                pts = zip(
                    config.n * np.sign(np.cos(theta)) * np.abs(np.cos(theta)) ** expo,
                    config.n * np.sign(np.sin(theta)) * np.abs(np.sin(theta)) ** expo,
                )
        for row in pts:
            fh.write(",".join(repr(float(c)) for c in row) + "\n")
    print(f"wrote {res ** naxes} grid rows to {config.out} (boundary: {boundary})")
    return 0


def _print_recovery(result, condition_line: str | None = None) -> None:
    if condition_line:
        print(condition_line)
    print(f"status         : {result.status}")
    print(f"kernel dim     : {result.kernel_dim} (expected points: {result.expected_count})")
    print(f"spectral gap   : {result.spectral_gap:.3e}")
    if result.variety is not None:
        print(f"recovered      : {result.variety.size} point(s)")
        print(f"moment residual: {result.moment_residual_rel:.3e} (relative)")
    for warning in result.warnings:
        print(f"warning        : {warning}")
    if result.matched is not None:
        print(f"max wrap error : {result.matched.max_point_error:.3e}")
        print(f"max coeff err  : {result.matched.max_coefficient_rel_error:.3e} (relative)")


def cmd_simulate(config: ExperimentConfig) -> int:
    """Generate a separated ensemble, compute exact moments, run recovery."""
    if config.n < 1:
        raise UsageError("n must be >= 1")
    rng = np.random.default_rng(config.seed)
    ensemble = generate_separated_ensemble(config.d, config.m, config.q, rng)
    q_actual = separation(ensemble).q if ensemble.size >= 2 else 0.5
    table = compute_moments(ensemble, config.n)
    if config.export_ensemble:
        ensemble.save(config.export_ensemble)
    if config.export_moments:
        table.save(config.export_moments)
    constants = constant_cd(config.d)
    lhs = (config.n - 1) * q_actual
    if lhs > constants.c_d:
        condition = (
            f"a-priori condition: (n-1)q = {lhs:.4f} > c_d = {constants.c_d:.4f} "
            "(recovery guaranteed)"
        )
    else:
        condition = (
            f"a-priori condition not met: (n-1)q = {lhs:.4f} <= c_d = "
            f"{constants.c_d:.4f} (outcome informational)"
        )
    result = full_pipeline(table, truth=ensemble, rel_tol=config.rel_tol)
    _print_recovery(result, condition)
    if config.out:
        result.save(config.out)
    return 0 if result.success else RECOVERY_FAILURE


def cmd_recover(config: ExperimentConfig) -> int:
    """Run the pipeline on a stored moment table."""
    if config.moments_path is None:
        raise UsageError("recover requires --moments")
    table = MomentTable.load(config.moments_path)
    truth = DiracEnsemble.load(config.truth_path) if config.truth_path else None
    try:
        result = full_pipeline(table, truth=truth, rel_tol=config.rel_tol)
    except RecoveryError as exc:
        print(f"status         : failed ({exc})")
        return RECOVERY_FAILURE
    _print_recovery(result)
    if config.out:
        result.save(config.out)
    return 0 if result.success else RECOVERY_FAILURE


def cmd_rank_sweep(config: ExperimentConfig) -> int:
    """Print rank A_l and rank T_l for l = 0..n_max with stabilization marker."""
    if config.ensemble_path:
        ensemble = DiracEnsemble.load(config.ensemble_path)
    else:
        rng = np.random.default_rng(config.seed)
        ensemble = generate_separated_ensemble(config.d, config.m, config.q, rng)
    n_max = config.n_max
    if n_max < 1:
        raise UsageError("n-max must be >= 1")
    ranks_a, gaps_a, ranks_t, gaps_t = [], [], [], []
    for level in range(n_max + 1):
        res_a = numerical_rank(
            build_vandermonde(ensemble, level).matrix, rel_tol=config.rel_tol
        )
        toeplitz = build_toeplitz(compute_moments(ensemble, level))
        res_t = numerical_rank(toeplitz.matrix, rel_tol=config.rel_tol)
        ranks_a.append(res_a.rank)
        gaps_a.append(res_a.gap)
        ranks_t.append(res_t.rank)
        gaps_t.append(res_t.gap)
    stabilization = None
    for level in range(n_max):
        if ranks_a[level] == ranks_a[level + 1]:
            stabilization = level
            break
    print(f"M = {ensemble.size}, d = {ensemble.dimension}")
    print(f"{'l':>3}  {'rank A_l':>8}  {'gap A':>9}  {'rank T_l':>8}  {'gap T':>9}")
    for level in range(n_max + 1):
        marker = "  <- stabilized" if stabilization is not None and level == stabilization else ""
        print(
            f"{level:>3}  {ranks_a[level]:>8}  {gaps_a[level]:>9.2e}  "
            f"{ranks_t[level]:>8}  {gaps_t[level]:>9.2e}{marker}"
        )
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="torusprony",
        description="Dirac-ensemble recovery on the torus from trigonometric moments",
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    p_const = sub.add_parser("constants", help="dimension constants table")
    p_const.add_argument("--d-list", type=str, default=None)
    p_const.add_argument("--out", type=str, default=None)

    p_cert = sub.add_parser("certify", help="lower-bound certificate")
    p_cert.add_argument("--d", type=int, required=True)
    p_cert.add_argument("--p", type=int, required=True)
    p_cert.add_argument("--q", type=float, required=True)
    p_cert.add_argument("--n", type=float, required=True)
    p_cert.add_argument("--variant", type=str, default=None)
    p_cert.add_argument("--out", type=str, default=None)

    p_grid = sub.add_parser("window-grid", help="CSV grid of psi or psi_hat")
    p_grid.add_argument("--p", type=int, required=True)
    p_grid.add_argument("--q", type=float, required=True)
    p_grid.add_argument("--n", type=float, required=True)
    p_grid.add_argument("--d", type=int, default=2)
    p_grid.add_argument("--which", type=str, default="psi")
    p_grid.add_argument("--res", type=int, default=101)
    p_grid.add_argument("--variant", type=str, default=None)
    p_grid.add_argument("--out", type=str, required=True)

    p_sim = sub.add_parser("simulate", help="seeded random recovery experiment")
    p_sim.add_argument("--d", type=int, required=True)
    p_sim.add_argument("--m", type=int, required=True)
    p_sim.add_argument("--q", type=float, required=True)
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--export-moments", type=str, default=None)
    p_sim.add_argument("--export-ensemble", type=str, default=None)
    p_sim.add_argument("--out", type=str, default=None)

    p_rec = sub.add_parser("recover", help="recover from a stored moment table")
    p_rec.add_argument("--moments", type=str, required=True)
    p_rec.add_argument("--truth", type=str, default=None)
    p_rec.add_argument("--out", type=str, default=None)

    p_rank = sub.add_parser("rank-sweep", help="rank of A_l and T_l for l=0..n_max")
    p_rank.add_argument("--ensemble", type=str, default=None)
    p_rank.add_argument("--d", type=int, default=1)
    p_rank.add_argument("--m", type=int, default=3)
    p_rank.add_argument("--q", type=float, default=0.2)
    p_rank.add_argument("--seed", type=int, default=0)
    p_rank.add_argument("--n-max", type=int, default=6)

    return parser


def _config_from_args(args: argparse.Namespace, rel_tol: float) -> ExperimentConfig:
    config = ExperimentConfig(mode=args.mode, rel_tol=rel_tol)
    if args.mode == "constants":
        if args.d_list:
            try:
                config.d_list = tuple(int(tok) for tok in args.d_list.split(","))
            except ValueError as exc:
                raise UsageError(f"bad --d-list: {exc}") from None
        config.out = args.out
    elif args.mode == "certify":
        config.d, config.p, config.q, config.n = args.d, args.p, args.q, args.n
        config.variant, config.out = args.variant, args.out
    elif args.mode == "window-grid":
        config.d, config.p, config.q, config.n = args.d, args.p, args.q, args.n
        config.which, config.resolution = args.which, args.res
        config.variant, config.out = args.variant, args.out
    elif args.mode == "simulate":
        config.d, config.m, config.q, config.n = args.d, args.m, args.q, args.n
        config.seed = args.seed
        config.export_moments = args.export_moments
        config.export_ensemble = args.export_ensemble
        config.out = args.out
    elif args.mode == "recover":
        config.moments_path = args.moments
        config.truth_path = args.truth
        config.out = args.out
    elif args.mode == "rank-sweep":
        config.ensemble_path = args.ensemble
        config.d, config.m, config.q = args.d, args.m, args.q
        config.seed, config.n_max = args.seed, args.n_max
    return config


_COMMANDS = {
    "constants": cmd_constants,
    "certify": cmd_certify,
    "window-grid": cmd_window_grid,
    "simulate": cmd_simulate,
    "recover": cmd_recover,
    "rank-sweep": cmd_rank_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rel_tol = float(os.environ.get("PRONY_TOL", DEFAULT_RANK_RTOL))
        if not rel_tol > 0:
            raise ValueError("PRONY_TOL must be positive")
    except ValueError as exc:
        print(f"torusprony: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        config = _config_from_args(args, rel_tol)
        return _COMMANDS[args.mode](config)
    except UsageError as exc:
        print(f"torusprony: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"torusprony: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
