"""Dirac ensembles on the unit torus and their separation geometry.

An ensemble is a finite list of pairwise distinct points t_1, ..., t_M in
[0,1)^d together with nonzero complex weights.  All geometry is wrap-around:
coordinates are compared modulo one and distances are taken in the max norm.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

# Global sign of the exponent in e^{sign * 2*pi*i * <k, t>} used for the node
# parameterization z_j, the moment transform and every matrix built from them.
# Exactly one convention must be used everywhere: mixing signs silently
# transposes/conjugates the structured matrices downstream.
EXPONENT_SIGN = -1.0

# Points closer than this in wrap-around max norm are numerically coincident;
# such ensembles are rejected at construction time.
COINCIDENCE_TOL = 1e-12


@dataclass(frozen=True)
class TorusPoint:
    """A point on [0,1)^d; raw coordinates are reduced mod 1 on construction."""

    coords: tuple

    def __post_init__(self):
        if len(self.coords) == 0:
            raise ValueError("torus point needs dimension d >= 1")
        reduced = []
        for c in self.coords:
            c = float(c)
            if not math.isfinite(c):
                raise ValueError(f"non-finite coordinate {c!r}")
            c = c - math.floor(c)
            if c >= 1.0:  # e.g. -1e-18 - floor(-1e-18) rounds up to 1.0
                c -= 1.0
            reduced.append(c + 0.0)
        object.__setattr__(self, "coords", tuple(reduced))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


def canonicalize(coords) -> TorusPoint:
    """Reduce a raw real vector mod 1 into [0,1)^d."""
    return TorusPoint(coords=tuple(np.atleast_1d(np.asarray(coords, dtype=float))))


def wrap_coord_distance(a: float, b: float) -> float:
    """min over integers r of |a - b + r| for scalars a, b."""
    delta = abs(a - b) % 1.0
    return min(delta, 1.0 - delta)


def wrap_distance(a: TorusPoint, b: TorusPoint) -> float:
    """Wrap-around max-norm distance between two torus points.

    Per coordinate this is min_{r in Z} |a_s - b_s + r|; for canonical
    coordinates in [0,1) only shifts r in {-1, 0, 1} can attain the minimum,
    since any |r| >= 2 puts |a_s - b_s + r| >= 1 > 1/2.
    """
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return max(wrap_coord_distance(x, y) for x, y in zip(a.coords, b.coords))


def wrap_distance_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized wrap max-norm distance; inputs broadcast over (..., d)."""
    delta = np.abs(np.asarray(a) - np.asarray(b)) % 1.0
    return np.max(np.minimum(delta, 1.0 - delta), axis=-1)


@dataclass(frozen=True)
class SeparationReport:
    """Minimal pairwise wrap distance q and the pair attaining it."""

    q: float
    argmin_pair: tuple

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("separation must be positive")


@dataclass(frozen=True)
class DiracEnsemble:
    """M pairwise distinct torus points with nonzero complex coefficients."""

    points: tuple
    coefficients: tuple

    def __post_init__(self):
        points = tuple(
            p if isinstance(p, TorusPoint) else canonicalize(p) for p in self.points
        )
        coefficients = tuple(complex(c) for c in self.coefficients)
        if len(points) == 0:
            raise ValueError("ensemble needs at least one point")
        if len(points) != len(coefficients):
            raise ValueError("points and coefficients must have equal length")
        d = points[0].dimension
        if any(p.dimension != d for p in points):
            raise ValueError("all points must share one dimension")
        if any(c == 0 for c in coefficients):
            raise ValueError("coefficients must be nonzero")
        for i, j in combinations(range(len(points)), 2):
            if wrap_distance(points[i], points[j]) < COINCIDENCE_TOL:
                raise ValueError(
                    f"points {i} and {j} coincide within {COINCIDENCE_TOL}"
                )
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def dimension(self) -> int:
        return self.points[0].dimension

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def points_array(self) -> np.ndarray:
        """(M, d) array of canonical coordinates."""
        return np.array([p.coords for p in self.points], dtype=float)

    @property
    def coefficients_array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=complex)

    def parameters(self) -> np.ndarray:
        """(M, d) array of unimodular nodes z_j = e^{EXPONENT_SIGN*2*pi*i*t_j}."""
        return np.exp(EXPONENT_SIGN * 2j * np.pi * self.points_array)

    def shifted(self, offset) -> "DiracEnsemble":
        """Ensemble with every point translated by `offset` (mod 1)."""
        off = np.asarray(offset, dtype=float)
        return DiracEnsemble(
            points=tuple(canonicalize(p.array + off) for p in self.points),
            coefficients=self.coefficients,
        )

    def to_json(self) -> dict:
        return {
            "d": self.dimension,
            "points": [list(p.coords) for p in self.points],
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DiracEnsemble":
        d = int(data["d"])
        points = []
        for row in data["points"]:
            if len(row) != d:
                raise ValueError("point dimension does not match 'd'")
            points.append(canonicalize(row))
        coeffs = [complex(re, im) for re, im in data["coefficients"]]
        return cls(points=tuple(points), coefficients=tuple(coeffs))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "DiracEnsemble":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def separation(ensemble: DiracEnsemble) -> SeparationReport:
    """Minimal wrap distance over all unordered pairs of ensemble points."""
    if ensemble.size < 2:
        raise ValueError("separation is undefined for a single-point ensemble")
    best = None
    best_pair = None
    for i, j in combinations(range(ensemble.size), 2):
        dist = wrap_distance(ensemble.points[i], ensemble.points[j])
        if best is None or dist < best:
            best = dist
            best_pair = (i, j)
    return SeparationReport(q=best, argmin_pair=best_pair)
