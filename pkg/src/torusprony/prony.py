"""Parameter identification from the kernel of the moment matrix.

The numerical kernel of T_n is an orthonormal set of coefficient arrays of
polynomials in the max-degree-n box.  On the torus their common zeros are
located through the sum-of-squares spectral function

    S(t) = sum_i |p_i(e^{-2*pi*i*t})|^2,

screened on a coarse tensor grid and refined by damped Gauss-Newton on the
residual map t -> (p_i(e^{-2*pi*i*t}))_i.  Coefficients are then recovered by
least squares against the moment table over the signed box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .ensemble import (
    EXPONENT_SIGN,
    DiracEnsemble,
    TorusPoint,
    canonicalize,
    wrap_distance_arrays,
)
from .moments import (
    DEFAULT_RANK_RTOL,
    MomentTable,
    MultiIndexBox,
    ToeplitzMatrix,
    VandermondeMatrix,
    build_toeplitz,
    build_vandermonde,
    numerical_rank,
    phase_matrix,
)


class RecoveryError(RuntimeError):
    """Raised when coefficient recovery hits a rank-deficient system."""


@dataclass(frozen=True, eq=False)
class KernelBasis:
    """Orthonormal basis of the numerical null space of a structured matrix.

    `vectors` rows are polynomial coefficient arrays over the unsigned box;
    `row_space` rows span the orthogonal complement (dimension = numerical
    rank), kept so grid scans can use the cheaper complementary form
    S(t) = box.size - ||row_space . e(t)||^2.
    """

    box: MultiIndexBox
    vectors: np.ndarray
    row_space: np.ndarray
    singular_values: np.ndarray
    threshold: float
    gap: float

    @property
    def kernel_dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def rank(self) -> int:
        return self.row_space.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.kernel_dim == 0


def _kernel_from_matrix(matrix: np.ndarray, box: MultiIndexBox, rel_tol: float) -> KernelBasis:
    _, sigma, vh = np.linalg.svd(matrix, full_matrices=True)
    if sigma.size == 0 or sigma[0] == 0.0:
        rank = 0
        threshold = 0.0
    else:
        threshold = rel_tol * sigma[0]
        rank = int(np.count_nonzero(sigma > threshold))
    if rank == 0:
        gap = np.inf
    elif rank < sigma.size:
        gap = float(sigma[rank - 1] / sigma[rank]) if sigma[rank] > 0 else np.inf
    else:
        gap = float(sigma[-1] / threshold)
    # conj(Vh[i]) is the i-th right singular vector as a coefficient row
    vectors = np.conj(vh[rank:])
    row_space = np.conj(vh[:rank])
    return KernelBasis(
        box=box,
        vectors=vectors,
        row_space=row_space,
        singular_values=sigma,
        threshold=threshold,
        gap=gap,
    )


def kernel_basis(toeplitz: ToeplitzMatrix, rel_tol: float = DEFAULT_RANK_RTOL) -> KernelBasis:
    """Numerical kernel of T_n (right singular vectors below rel_tol*sigma_max)."""
    return _kernel_from_matrix(toeplitz.matrix, toeplitz.box, rel_tol)


def kernel_basis_of_vandermonde(
    vandermonde: VandermondeMatrix, rel_tol: float = DEFAULT_RANK_RTOL
) -> KernelBasis:
    """Numerical kernel of A_n, as polynomials over the unsigned box."""
    return _kernel_from_matrix(vandermonde.matrix, vandermonde.box, rel_tol)


def _phases(basis: KernelBasis, points: np.ndarray) -> np.ndarray:
    return phase_matrix(points, basis.box.indices())


def spectral_function(basis: KernelBasis, t) -> float:
    """S(t) = sum_i |p_i(e^{-2*pi*i*t})|^2 over the kernel polynomials."""
    if basis.is_empty:
        raise ValueError("kernel basis is empty")
    point = t.array if isinstance(t, TorusPoint) else np.atleast_1d(np.asarray(t, float))
    e = _phases(basis, point[None, :])[0]
    vals = basis.vectors @ e
    return float(np.sum(np.abs(vals) ** 2))


def spectral_function_batch(basis: KernelBasis, points: np.ndarray) -> np.ndarray:
    """S evaluated at many points, shape (P, d) -> (P,)."""
    if basis.is_empty:
        raise ValueError("kernel basis is empty")
    e = _phases(basis, np.asarray(points, dtype=float))  # (P, N)
    vals = basis.vectors @ e.T
    return np.sum(np.abs(vals) ** 2, axis=0)


def _spectral_grid(basis: KernelBasis, grid: int) -> np.ndarray:
    """S on the tensor grid (g_1..g_d)/grid via the complementary form."""
    box = basis.box
    side, d = box.side, box.d
    ticks = np.arange(grid) / grid
    axis_phase = np.exp(
        EXPONENT_SIGN * 2j * np.pi * np.outer(np.arange(side), ticks)
    )  # (side, grid)
    # coordinate 0 is fastest in the flat layout -> F-order reshape
    tensor = basis.row_space.T.reshape((side,) * d + (basis.rank,), order="F")
    for _ in range(d):
        tensor = np.tensordot(tensor, axis_phase, axes=([0], [0]))
    # tensor now has shape (rank, grid, ..., grid) with axis s+1 = coordinate s
    power = np.sum(np.abs(tensor) ** 2, axis=0)
    return np.maximum(box.size - power, 0.0)


def _local_minima_mask(values: np.ndarray) -> np.ndarray:
    mask = np.ones(values.shape, dtype=bool)
    d = values.ndim
    for shift in np.ndindex(*([3] * d)):
        offsets = tuple(s - 1 for s in shift)
        if all(o == 0 for o in offsets):
            continue
        mask &= values <= np.roll(values, offsets, axis=tuple(range(d)))
    return mask


def _gauss_newton(basis: KernelBasis, t0: np.ndarray, max_iter: int) -> np.ndarray:
    """Damped Gauss-Newton on the projected residual; returns the refined point.

    Works with s(t) = e(t) - R^H (R e(t)) where R spans the row space; this
    has the same least-squares geometry as the kernel-polynomial residual
    (an isometry maps one onto the other) at O(N * rank) cost per step.
    """
    box = basis.box
    indices = box.indices().astype(float)
    row = basis.row_space
    two_pi = EXPONENT_SIGN * 2j * np.pi

    def residual_jacobian(t):
        e = np.exp(two_pi * (indices @ t))
        deriv = e[:, None] * (two_pi * indices)
        s = e - row.conj().T @ (row @ e)
        jac = deriv - row.conj().T @ (row @ deriv)
        return s, jac

    t = np.asarray(t0, dtype=float).copy()
    s, jac = residual_jacobian(t)
    value = float(np.sum(np.abs(s) ** 2))
    for _ in range(max_iter):
        hess = np.real(jac.conj().T @ jac)
        grad = np.real(jac.conj().T @ s)
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)) or np.max(np.abs(step)) < 1e-15:
            break
        alpha = 1.0
        improved = False
        for _ in range(30):
            trial = t + alpha * step
            s_trial = residual_jacobian(trial)[0]
            trial_value = float(np.sum(np.abs(s_trial) ** 2))
            if trial_value < value:
                t, value = trial % 1.0, trial_value
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
        s, jac = residual_jacobian(t)
    return t % 1.0


@dataclass(frozen=True, eq=False)
class Variety:
    """Accepted common zeros on the torus with their spectral residuals."""

    zeros: tuple
    residuals: np.ndarray
    merge_radius: float
    dropped: int = 0

    @property
    def size(self) -> int:
        return len(self.zeros)

    @property
    def points_array(self) -> np.ndarray:
        return np.array([z.coords for z in self.zeros], dtype=float)


def extract_variety(
    basis: KernelBasis,
    grid_per_period: int = 8,
    screen_frac: float = 1e-4,
    merge_frac: float = 1.0 / 16.0,
    accept_rel: float = 1e-16,
    max_iter: int = 100,
) -> Variety:
    """Locate the common zeros of the kernel polynomials on the torus.

    Coarse scan at resolution 1/(grid_per_period * n) per axis, keep local
    minima below screen_frac * max S together with the smallest few (the
    numerical rank bounds how many zeros can exist, and the quadratic dip of
    S around a zero need not reach the screen threshold at grid resolution),
    refine by damped Gauss-Newton, merge within merge_frac / n, accept when
    the direct kernel-polynomial residual is below accept_rel * kernel_dim.
    """
    if basis.is_empty:
        raise ValueError("kernel basis is empty")
    n = max(basis.box.n, 1)
    grid = max(4, grid_per_period * n)
    values = _spectral_grid(basis, grid)
    minima = _local_minima_mask(values)
    coords = np.argwhere(minima)
    vals = values[minima]
    order = np.argsort(vals, kind="stable")
    passed_screen = vals[order] <= screen_frac * float(values.max())
    speculative = ~passed_screen
    keep_count = min(len(order), 2 * basis.rank + 8)
    selected = passed_screen.copy()
    selected[:keep_count] = True
    candidates = coords[order[selected]] / grid
    candidate_is_speculative = speculative[selected]

    accept_tol = accept_rel * basis.kernel_dim
    merge_radius = merge_frac / n
    refined = []
    for start, spec_flag in zip(candidates, candidate_is_speculative):
        point = _gauss_newton(basis, start, max_iter=max_iter)
        residual = spectral_function(basis, point)
        refined.append((residual, point, bool(spec_flag)))
    refined.sort(key=lambda item: (item[0], tuple(item[1])))

    kept_points = []
    kept_residuals = []
    dropped = 0
    for residual, point, spec_flag in refined:
        if kept_points and np.any(
            wrap_distance_arrays(np.array(kept_points), point) < merge_radius
        ):
            continue
        if residual <= accept_tol:
            kept_points.append(point)
            kept_residuals.append(residual)
        elif not spec_flag:
            # looked like a zero on the grid but refinement did not confirm it
            dropped += 1

    order = sorted(range(len(kept_points)), key=lambda i: tuple(kept_points[i]))
    zeros = tuple(canonicalize(kept_points[i]) for i in order)
    residuals = np.array([kept_residuals[i] for i in order], dtype=float)
    return Variety(zeros=zeros, residuals=residuals, merge_radius=merge_radius, dropped=dropped)


@dataclass(frozen=True, eq=False)
class MatchReport:
    """Optimal assignment of recovered points to a ground-truth ensemble."""

    pairs: tuple
    point_errors: np.ndarray
    coefficient_errors: np.ndarray
    coefficient_rel_errors: np.ndarray
    unmatched_recovered: int
    unmatched_truth: int

    @property
    def max_point_error(self) -> float:
        return float(np.max(self.point_errors)) if self.point_errors.size else np.inf

    @property
    def max_coefficient_rel_error(self) -> float:
        if self.coefficient_rel_errors.size == 0:
            return np.inf
        return float(np.max(self.coefficient_rel_errors))

    @property
    def complete(self) -> bool:
        return self.unmatched_recovered == 0 and self.unmatched_truth == 0

    def to_json(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "point_errors": list(map(float, self.point_errors)),
            "coefficient_errors": list(map(float, self.coefficient_errors)),
            "coefficient_rel_errors": list(map(float, self.coefficient_rel_errors)),
            "unmatched_recovered": self.unmatched_recovered,
            "unmatched_truth": self.unmatched_truth,
        }


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """Outcome of the identification pipeline, including structured failures."""

    status: str
    variety: Variety | None
    coefficients: np.ndarray
    spurious: np.ndarray
    moment_residual_abs: float
    moment_residual_rel: float
    kernel_dim: int
    expected_count: int
    spectral_gap: float
    matched: MatchReport | None = None
    warnings: tuple = ()

    @property
    def success(self) -> bool:
        return self.status == "success"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "zeros": [list(z.coords) for z in self.variety.zeros] if self.variety else [],
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
            "spurious": [bool(b) for b in self.spurious],
            "residuals": list(map(float, self.variety.residuals)) if self.variety else [],
            "moment_residual_abs": self.moment_residual_abs,
            "moment_residual_rel": self.moment_residual_rel,
            "kernel_dim": self.kernel_dim,
            "expected_count": self.expected_count,
            "spectral_gap": self.spectral_gap,
            "warnings": list(self.warnings),
            "matching": self.matched.to_json() if self.matched else None,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


def _failure(status: str, basis: KernelBasis, warnings: tuple) -> RecoveryResult:
    return RecoveryResult(
        status=status,
        variety=None,
        coefficients=np.zeros(0, dtype=complex),
        spurious=np.zeros(0, dtype=bool),
        moment_residual_abs=np.inf,
        moment_residual_rel=np.inf,
        kernel_dim=basis.kernel_dim,
        expected_count=basis.rank,
        spectral_gap=basis.gap,
        matched=None,
        warnings=warnings,
    )


def recover_coefficients(table: MomentTable, variety: Variety) -> RecoveryResult:
    """Least-squares coefficients for the recovered points over the signed box."""
    if variety.size == 0:
        raise ValueError("variety is empty")
    if variety.size > table.box.size:
        raise ValueError("more recovered points than moments")
    matrix = phase_matrix(variety.points_array, table.box.indices()).T  # (K, Mr)
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[-1] < 1e-10 * sv[0]:
        raise RecoveryError(
            "rank-deficient least-squares system; recovered points nearly "
            f"coincide (singular values {sv[0]:.3e} .. {sv[-1]:.3e})"
        )
    coeffs, _, _, _ = np.linalg.lstsq(matrix, table.values, rcond=None)
    fit = matrix @ coeffs
    residual = float(np.linalg.norm(fit - table.values))
    norm = float(np.linalg.norm(table.values))
    spurious = np.abs(coeffs) < 1e-10 * np.max(np.abs(coeffs))
    return RecoveryResult(
        status="success",
        variety=variety,
        coefficients=coeffs,
        spurious=spurious,
        moment_residual_abs=residual,
        moment_residual_rel=residual / norm if norm > 0 else np.inf,
        kernel_dim=0,
        expected_count=variety.size,
        spectral_gap=np.inf,
    )


def match_to_truth(
    points: np.ndarray, coefficients: np.ndarray, truth: DiracEnsemble
) -> MatchReport:
    """Optimal assignment between recovered and true points under wrap distance."""
    truth_pts = truth.points_array
    cost = wrap_distance_arrays(points[:, None, :], truth_pts[None, :, :])
    rows, cols = linear_sum_assignment(cost)
    point_errors = cost[rows, cols]
    truth_coeffs = truth.coefficients_array
    coeff_err = np.abs(coefficients[rows] - truth_coeffs[cols])
    coeff_rel = coeff_err / np.abs(truth_coeffs[cols])
    return MatchReport(
        pairs=tuple(zip(map(int, rows), map(int, cols))),
        point_errors=point_errors,
        coefficient_errors=coeff_err,
        coefficient_rel_errors=coeff_rel,
        unmatched_recovered=len(points) - len(rows),
        unmatched_truth=truth.size - len(cols),
    )


def full_pipeline(
    table: MomentTable,
    truth: DiracEnsemble | None = None,
    rel_tol: float = DEFAULT_RANK_RTOL,
    grid_per_period: int = 8,
    screen_frac: float = 1e-4,
    merge_frac: float = 1.0 / 16.0,
    accept_rel: float = 1e-16,
    max_iter: int = 100,
) -> RecoveryResult:
    """Toeplitz kernel -> variety -> coefficients, with structured failures.

    The number of points is never guessed in advance: it emerges as the
    numerical rank of T_n and is cross-checked against the variety size.
    """
    toeplitz = build_toeplitz(table)
    basis = kernel_basis(toeplitz, rel_tol=rel_tol)
    if basis.is_empty:
        return _failure(
            "empty_kernel",
            basis,
            ("kernel of T_n is empty: order too small or too many points",),
        )
    variety = extract_variety(
        basis,
        grid_per_period=grid_per_period,
        screen_frac=screen_frac,
        merge_frac=merge_frac,
        accept_rel=accept_rel,
        max_iter=max_iter,
    )
    warnings = []
    if variety.dropped:
        warnings.append(f"{variety.dropped} candidate zero(s) failed to converge")
    if variety.size == 0:
        return _failure("empty_variety", basis, tuple(warnings))
    if variety.size != basis.rank:
        warnings.append(
            f"variety size {variety.size} differs from rank-expected count {basis.rank}"
        )
    result = recover_coefficients(table, variety)
    matched = None
    if truth is not None:
        matched = match_to_truth(variety.points_array, result.coefficients, truth)
    return RecoveryResult(
        status="success",
        variety=variety,
        coefficients=result.coefficients,
        spurious=result.spurious,
        moment_residual_abs=result.moment_residual_abs,
        moment_residual_rel=result.moment_residual_rel,
        kernel_dim=basis.kernel_dim,
        expected_count=basis.rank,
        spectral_gap=basis.gap,
        matched=matched,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True, eq=False)
class RankStabilizationReport:
    """Rank of A_l for l = 0..n_max with the first stabilization index."""

    ranks: tuple
    gaps: tuple
    stabilization_index: int | None
    stabilized_rank: int | None
    ensemble_size: int

    @property
    def nondecreasing(self) -> bool:
        return all(b >= a for a, b in zip(self.ranks, self.ranks[1:]))

    @property
    def constant_after_stabilization(self) -> bool:
        if self.stabilization_index is None:
            return True
        tail = self.ranks[self.stabilization_index:]
        return all(r == tail[0] for r in tail)

    @property
    def stabilized_at_size(self) -> bool:
        return self.stabilized_rank == self.ensemble_size


def rank_stabilization_check(
    ensemble: DiracEnsemble, n_max: int, rel_tol: float = DEFAULT_RANK_RTOL
) -> RankStabilizationReport:
    """Rank sweep of the Vandermonde family; once two consecutive orders agree
    the rank has reached the number of points and never moves again."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    ranks = []
    gaps = []
    for level in range(n_max + 1):
        res = numerical_rank(build_vandermonde(ensemble, level).matrix, rel_tol=rel_tol)
        ranks.append(res.rank)
        gaps.append(res.gap)
    stabilization = None
    for level in range(n_max):
        if ranks[level] == ranks[level + 1]:
            stabilization = level
            break
    return RankStabilizationReport(
        ranks=tuple(ranks),
        gaps=tuple(gaps),
        stabilization_index=stabilization,
        stabilized_rank=None if stabilization is None else ranks[stabilization],
        ensemble_size=ensemble.size,
    )


@dataclass(frozen=True, eq=False)
class IdentificationReport:
    """Zero-set check for ker A_{n+1} against the true parameters."""

    applicable: bool
    rank_at_n: int
    max_residual_at_true: float
    min_value_off_params: float
    probes_used: int


def variety_identification_check(
    ensemble: DiracEnsemble,
    n: int,
    rel_tol: float = DEFAULT_RANK_RTOL,
    probes: int = 1000,
    min_probe_distance_frac: float = 0.25,
    seed: int = 0,
) -> IdentificationReport:
    """Verify that ker A_{n+1} vanishes at the parameters and nowhere else.

    Requires rank A_n = M; otherwise reported as not applicable.  Off-zero
    behaviour is probed at seeded random points kept at wrap distance at
    least min_probe_distance_frac * q from every parameter.
    """
    from .ensemble import separation  # local import to avoid cycle noise

    rank_n = numerical_rank(build_vandermonde(ensemble, n).matrix, rel_tol=rel_tol).rank
    if rank_n != ensemble.size:
        return IdentificationReport(
            applicable=False,
            rank_at_n=rank_n,
            max_residual_at_true=np.inf,
            min_value_off_params=0.0,
            probes_used=0,
        )
    basis = kernel_basis_of_vandermonde(build_vandermonde(ensemble, n + 1), rel_tol=rel_tol)
    truth = ensemble.points_array
    max_true = max(spectral_function(basis, t) for t in truth)

    q = separation(ensemble).q if ensemble.size >= 2 else 0.5
    min_dist = min_probe_distance_frac * q
    rng = np.random.default_rng(seed)
    collected = []
    attempts = 0
    while len(collected) < probes and attempts < 100 * probes:
        block = rng.random((probes, ensemble.dimension))
        attempts += probes
        dist = wrap_distance_arrays(block[:, None, :], truth[None, :, :]).min(axis=1)
        collected.extend(block[dist >= min_dist])
    probe_points = np.array(collected[:probes])
    values = spectral_function_batch(basis, probe_points)
    return IdentificationReport(
        applicable=True,
        rank_at_n=rank_n,
        max_residual_at_true=float(max_true),
        min_value_off_params=float(values.min()),
        probes_used=len(probe_points),
    )
