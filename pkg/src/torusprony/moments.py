"""Trigonometric moments and the structured matrices assembled from them.

The moment sequence of an ensemble is f(k) = sum_j c_j z_j^k over multi-indices
k with ||k||_inf <= n, where z_j = e^{-2*pi*i*t_j} (see ensemble.EXPONENT_SIGN).
From it we build the multilevel Toeplitz matrix T_n and the Vandermonde-type
matrix A_n = (z_j^k) over the unsigned index box, with the exact factorization
T_n = A_n^H diag(c) A_n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ensemble import EXPONENT_SIGN, DiracEnsemble, separation

DEFAULT_RANK_RTOL = 1e-8


@dataclass(frozen=True)
class MultiIndexBox:
    """Multi-index box {lo..n}^d with a fixed colexicographic enumeration.

    Signed boxes run over {-n..n}^d, unsigned over {0..n}^d.  The flat order
    is colexicographic with the FIRST coordinate fastest: the flat position of
    k is sum_s (k_s - lo) * side^s.  This keeps multilevel Toeplitz blocks
    contiguous per level.
    """

    d: int
    n: int
    signed: bool = False

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.n < 0:
            raise ValueError("order must be >= 0")

    @property
    def lo(self) -> int:
        return -self.n if self.signed else 0

    @property
    def side(self) -> int:
        return 2 * self.n + 1 if self.signed else self.n + 1

    @property
    def size(self) -> int:
        return self.side ** self.d

    def indices(self) -> np.ndarray:
        """(size, d) int array of multi-indices in enumeration order."""
        return _box_indices(self.d, self.n, self.signed)

    def flat_index(self, k) -> np.ndarray:
        """Flat enumeration position(s) of multi-index rows k (..., d)."""
        k = np.asarray(k)
        shifted = k - self.lo
        if np.any(shifted < 0) or np.any(shifted >= self.side):
            raise ValueError("multi-index outside the box")
        strides = self.side ** np.arange(self.d)
        return shifted @ strides


@lru_cache(maxsize=64)
def _box_indices(d: int, n: int, signed: bool) -> np.ndarray:
    lo = -n if signed else 0
    side = 2 * n + 1 if signed else n + 1
    flat = np.arange(side ** d)
    out = np.empty((flat.size, d), dtype=np.int64)
    for s in range(d):
        out[:, s] = (flat // side ** s) % side + lo
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Moment values over a signed box, in the box enumeration order."""

    box: MultiIndexBox
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != self.box.size:
            raise ValueError("value count does not match the box size")
        object.__setattr__(
            self, "values", np.asarray(self.values, dtype=complex).reshape(-1)
        )

    def value_at(self, k) -> complex:
        return self.values[self.box.flat_index(np.asarray(k))]

    def to_json(self) -> dict:
        return {
            "d": self.box.d,
            "n": self.box.n,
            "signed": self.box.signed,
            "values": [[v.real, v.imag] for v in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MomentTable":
        box = MultiIndexBox(d=int(data["d"]), n=int(data["n"]), signed=bool(data["signed"]))
        values = np.array([complex(re, im) for re, im in data["values"]])
        return cls(box=box, values=values)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "MomentTable":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True, eq=False)
class VandermondeMatrix:
    """A_n = (z_j^k), rows j = 1..M, columns k over the unsigned box."""

    matrix: np.ndarray
    box: MultiIndexBox
    ensemble: DiracEnsemble


@dataclass(frozen=True, eq=False)
class ToeplitzMatrix:
    """Multilevel Toeplitz moment matrix over the unsigned box of order n.

    The entry at row k, column l is the moment at l - k.  With the global
    exponent sign this is exactly A_n^H diag(c) A_n, so kernel vectors are
    coefficient arrays of polynomials vanishing at the nodes z_j; storing the
    moment at k - l instead would factor through the conjugate ensemble.
    """

    matrix: np.ndarray
    box: MultiIndexBox

    @property
    def side(self) -> int:
        return self.matrix.shape[0]


def phase_matrix(points: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """(P, K) matrix e^{EXPONENT_SIGN*2*pi*i*<k, t>} for points t, indices k."""
    return np.exp(EXPONENT_SIGN * 2j * np.pi * (points @ indices.T))


def compute_moments(ensemble: DiracEnsemble, n: int) -> MomentTable:
    """Evaluate f(k) = sum_j c_j z_j^k over the signed box of order n.

    Direct summation over the ensemble; no approximate transform is involved.
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    box = MultiIndexBox(d=ensemble.dimension, n=n, signed=True)
    phases = phase_matrix(ensemble.points_array, box.indices())  # (M, size)
    values = ensemble.coefficients_array @ phases
    return MomentTable(box=box, values=values)


def build_vandermonde(ensemble: DiracEnsemble, n: int) -> VandermondeMatrix:
    """Assemble A_n with entries z_j^k over the unsigned box of order n."""
    if n < 0:
        raise ValueError("order must be >= 0")
    box = MultiIndexBox(d=ensemble.dimension, n=n, signed=False)
    matrix = phase_matrix(ensemble.points_array, box.indices())
    return VandermondeMatrix(matrix=matrix, box=box, ensemble=ensemble)


def build_toeplitz(table: MomentTable) -> ToeplitzMatrix:
    """Assemble T_n from a moment table of signed order n."""
    box = table.box
    if not box.signed:
        raise ValueError("a signed moment table of order n is required for T_n")
    ubox = MultiIndexBox(d=box.d, n=box.n, signed=False)
    idx = ubox.indices()
    diff = idx[None, :, :] - idx[:, None, :]  # row k, column l -> l - k
    flat = box.flat_index(diff.reshape(-1, box.d)).reshape(ubox.size, ubox.size)
    return ToeplitzMatrix(matrix=table.values[flat], box=ubox)


def factorization_residual(ensemble: DiracEnsemble, n: int) -> float:
    """Frobenius norm of T_n - A_n^H diag(c) A_n; zero up to roundoff."""
    toeplitz = build_toeplitz(compute_moments(ensemble, n))
    vand = build_vandermonde(ensemble, n).matrix
    product = vand.conj().T @ (ensemble.coefficients_array[:, None] * vand)
    return float(np.linalg.norm(toeplitz.matrix - product))


@dataclass(frozen=True, eq=False)
class RankResult:
    """Numerical rank with the full singular spectrum for diagnostics.

    `gap` measures how clean the rank decision was: the ratio of the smallest
    kept singular value to the largest discarded one, or to the threshold
    itself when nothing falls below it (full-rank matrices).
    """

    rank: int
    singular_values: np.ndarray
    threshold: float
    gap: float


def numerical_rank(matrix: np.ndarray, rel_tol: float = DEFAULT_RANK_RTOL) -> RankResult:
    """Count singular values above rel_tol * sigma_max."""
    matrix = np.asarray(matrix)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix has non-finite entries")
    sigma = np.linalg.svd(matrix, compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return RankResult(rank=0, singular_values=sigma, threshold=0.0, gap=np.inf)
    threshold = rel_tol * sigma[0]
    rank = int(np.count_nonzero(sigma > threshold))
    if rank == 0:
        gap = np.inf
    elif rank < sigma.size and sigma[rank] > 0:
        gap = float(sigma[rank - 1] / sigma[rank])
    elif rank < sigma.size:
        gap = np.inf
    else:
        gap = float(sigma[-1] / threshold)
    return RankResult(rank=rank, singular_values=sigma, threshold=threshold, gap=gap)


@dataclass(frozen=True)
class ConditioningReport:
    """Condition number of A_n A_n^H with the grid reference value if it applies.

    For a Cartesian product of equispaced points per axis the condition number
    has the exact value prod_s ceil((n+1) q_s) / floor((n+1) q_s) with q_s the
    per-axis spacing, provided no (n+1) q_s is an integer.
    """

    n: int
    d: int
    q: float
    kappa: float
    rank: int
    size: int
    theoretical_lower: float | None = None
    relative_deviation: float | None = None
    equispaced_grid: bool = False


def equispaced_kappa_formula(nq: float, d: int) -> float:
    """(ceil(nq)/floor(nq))^d, the grid condition number at (n+1)q = nq.

    Formula-level only; intended also for dimensions where the matrix itself
    would be astronomically large.
    """
    if np.floor(nq) < 1:
        return np.inf
    return float((np.ceil(nq) / np.floor(nq)) ** d)


def _axis_grid_spacing(values: np.ndarray, tol: float = 1e-9):
    """Spacing 1/m if `values` are m equispaced points mod 1, else None."""
    vals = np.sort(np.unique(np.round(values / tol) * tol))
    m = len(vals)
    if m == 1:
        return 1.0, vals
    gaps = np.diff(np.concatenate([vals, [vals[0] + 1.0]]))
    if np.all(np.abs(gaps - 1.0 / m) < 10 * tol):
        return 1.0 / m, vals
    return None, vals


def detect_equispaced_grid(ensemble: DiracEnsemble, tol: float = 1e-9):
    """Per-axis spacings (q_1..q_d) if the points form a full Cartesian product
    of equispaced one-dimensional grids, else None."""
    pts = ensemble.points_array
    spacings = []
    axis_vals = []
    total = 1
    for s in range(ensemble.dimension):
        spacing, vals = _axis_grid_spacing(pts[:, s], tol=tol)
        if spacing is None:
            return None
        spacings.append(spacing)
        axis_vals.append(vals)
        total *= len(vals)
    if total != ensemble.size:
        return None
    # All combinations must actually be present.
    seen = {tuple(np.round(p / tol).astype(np.int64)) for p in pts}
    if len(seen) != ensemble.size:
        return None
    return tuple(spacings)


def condition_report(
    ensemble: DiracEnsemble, n: int, rel_tol: float = DEFAULT_RANK_RTOL
) -> ConditioningReport:
    """Condition number kappa(A_n A_n^H), infinite when A_n is rank deficient."""
    vand = build_vandermonde(ensemble, n)
    gram = vand.matrix @ vand.matrix.conj().T
    eigs = np.linalg.eigvalsh(gram)
    rank = numerical_rank(vand.matrix, rel_tol=rel_tol).rank
    q = separation(ensemble).q if ensemble.size >= 2 else 1.0
    if rank < ensemble.size:
        kappa = np.inf
    else:
        kappa = float(eigs[-1] / eigs[0])
    theoretical = None
    deviation = None
    spacings = detect_equispaced_grid(ensemble)
    if spacings is not None and np.isfinite(kappa):
        factors = np.array([(n + 1) * qs for qs in spacings])
        # The closed grid formula needs every (n+1) q_s strictly between
        # consecutive integers.
        if np.all(np.abs(factors - np.round(factors)) > 1e-9) and np.all(
            np.floor(factors) >= 1
        ):
            theoretical = float(np.prod(np.ceil(factors) / np.floor(factors)))
            deviation = abs(kappa - theoretical) / theoretical
    return ConditioningReport(
        n=n,
        d=ensemble.dimension,
        q=q,
        kappa=kappa,
        rank=rank,
        size=ensemble.size,
        theoretical_lower=theoretical,
        relative_deviation=deviation,
        equispaced_grid=spacings is not None,
    )


def _format_complex(value: complex) -> str:
    re, im = float(value.real), float(value.imag)
    sign = "+" if im >= 0 else "-"
    return f"{re!r}{sign}{abs(im)!r}i"


def write_matrix_csv(path, matrix: np.ndarray) -> None:
    """Row-major CSV dump with 're+imi' cells for external inspection."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    with open(path, "w") as fh:
        for row in matrix:
            fh.write(",".join(_format_complex(v) for v in row) + "\n")
