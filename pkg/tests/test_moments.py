import itertools

import numpy as np
import pytest

from torusprony import (
    DiracEnsemble,
    MomentTable,
    MultiIndexBox,
    build_toeplitz,
    build_vandermonde,
    canonicalize,
    compute_moments,
    condition_report,
    equispaced_kappa_formula,
    factorization_residual,
    kernel_basis,
    numerical_rank,
    write_matrix_csv,
)
from conftest import seeded_ensemble


def brute_force_moment(ensemble, k):
    """Independent oracle: plain python sum of c_j e^{-2 pi i <k, t_j>}."""
    total = 0j
    for point, coeff in zip(ensemble.points, ensemble.coefficients):
        total += coeff * np.exp(-2j * np.pi * np.dot(k, point.coords))
    return total


def grid_ensemble(d, m_axis, coeffs=None):
    pts = [
        canonicalize(p)
        for p in itertools.product(*([np.arange(m_axis) / m_axis] * d))
    ]
    if coeffs is None:
        coeffs = [1.0] * len(pts)
    return DiracEnsemble(points=tuple(pts), coefficients=tuple(coeffs))


class TestMultiIndexBox:
    def test_cardinality(self):
        assert MultiIndexBox(d=2, n=3, signed=True).size == 49
        assert MultiIndexBox(d=3, n=2, signed=False).size == 27

    def test_first_coordinate_fastest(self):
        box = MultiIndexBox(d=2, n=1, signed=False)
        idx = box.indices()
        np.testing.assert_array_equal(idx, [[0, 0], [1, 0], [0, 1], [1, 1]])

    def test_flat_index_inverts_enumeration(self):
        box = MultiIndexBox(d=3, n=2, signed=True)
        idx = box.indices()
        np.testing.assert_array_equal(box.flat_index(idx), np.arange(box.size))

    def test_flat_index_rejects_outside(self):
        box = MultiIndexBox(d=1, n=1, signed=False)
        with pytest.raises(ValueError):
            box.flat_index([[2]])


class TestComputeMoments:
    def test_single_spike_at_origin(self):
        ens = DiracEnsemble(points=(canonicalize([0.0, 0.0]),), coefficients=(1.0,))
        table = compute_moments(ens, 2)
        np.testing.assert_allclose(table.values, 1.0)

    def test_single_spike_unimodular(self):
        ens = DiracEnsemble(points=(canonicalize([0.37, 0.81]),), coefficients=(2 - 1j,))
        table = compute_moments(ens, 3)
        np.testing.assert_allclose(np.abs(table.values), abs(2 - 1j), atol=1e-12)

    def test_two_spikes_alternating(self):
        ens = DiracEnsemble(
            points=(canonicalize([0.0]), canonicalize([0.5])), coefficients=(1.0, 1.0)
        )
        table = compute_moments(ens, 4)
        for k in range(-4, 5):
            expected = 1.0 + (-1.0) ** k
            assert table.value_at([k]) == pytest.approx(expected, abs=1e-12)

    def test_matches_brute_force(self):
        ens = seeded_ensemble(5, 2, 4, 0.2)
        table = compute_moments(ens, 3)
        for k in table.box.indices()[::7]:
            assert table.value_at(k) == pytest.approx(brute_force_moment(ens, k))

    def test_conjugate_symmetry_for_real_coefficients(self):
        ens = DiracEnsemble(
            points=(canonicalize([0.11, 0.3]), canonicalize([0.62, 0.95])),
            coefficients=(1.5, -0.7),
        )
        table = compute_moments(ens, 3)
        for k in table.box.indices():
            assert table.value_at(-k) == pytest.approx(np.conj(table.value_at(k)))

    def test_linearity_under_ensemble_union(self):
        e1 = seeded_ensemble(1, 2, 2, 0.25)
        e2 = seeded_ensemble(2, 2, 2, 0.25)
        union = DiracEnsemble(
            points=e1.points + e2.points,
            coefficients=e1.coefficients + e2.coefficients,
        )
        t_union = compute_moments(union, 3)
        t_sum = compute_moments(e1, 3).values + compute_moments(e2, 3).values
        np.testing.assert_allclose(t_union.values, t_sum, atol=1e-12)


class TestVandermonde:
    def test_order_zero_is_ones(self):
        ens = seeded_ensemble(3, 2, 3, 0.2)
        vand = build_vandermonde(ens, 0)
        np.testing.assert_allclose(vand.matrix, np.ones((3, 1)))

    def test_exponent_convention(self):
        ens = DiracEnsemble(points=(canonicalize([0.25]),), coefficients=(1.0,))
        vand = build_vandermonde(ens, 2)
        np.testing.assert_allclose(vand.matrix[0], [1.0, -1j, -1.0], atol=1e-14)

    def test_entries_unimodular(self):
        ens = seeded_ensemble(4, 3, 3, 0.2)
        vand = build_vandermonde(ens, 2)
        np.testing.assert_allclose(np.abs(vand.matrix), 1.0, atol=1e-12)

    def test_column_subset_of_next_order(self):
        ens = seeded_ensemble(6, 2, 4, 0.2)
        small = build_vandermonde(ens, 2)
        large = build_vandermonde(ens, 3)
        positions = large.box.flat_index(small.box.indices())
        np.testing.assert_allclose(small.matrix, large.matrix[:, positions], atol=1e-14)


class TestToeplitz:
    def test_all_ones_rank_one(self):
        ens = DiracEnsemble(points=(canonicalize([0.0, 0.0]),), coefficients=(1.0,))
        toeplitz = build_toeplitz(compute_moments(ens, 2))
        np.testing.assert_allclose(toeplitz.matrix, 1.0)
        assert numerical_rank(toeplitz.matrix).rank == 1

    def test_alternating_two_spike_toeplitz(self):
        ens = DiracEnsemble(
            points=(canonicalize([0.0]), canonicalize([0.5])), coefficients=(1.0, 1.0)
        )
        toeplitz = build_toeplitz(compute_moments(ens, 1))
        np.testing.assert_allclose(toeplitz.matrix, [[2, 0], [0, 2]], atol=1e-12)

    def test_requires_signed_table(self):
        box = MultiIndexBox(d=1, n=1, signed=False)
        table = MomentTable(box=box, values=np.ones(2, dtype=complex))
        with pytest.raises(ValueError):
            build_toeplitz(table)

    def test_entries_depend_only_on_difference(self):
        ens = seeded_ensemble(7, 2, 3, 0.2)
        toeplitz = build_toeplitz(compute_moments(ens, 2))
        idx = toeplitz.box.indices()
        table = compute_moments(ens, 2)
        for a in range(0, toeplitz.side, 3):
            for b in range(0, toeplitz.side, 3):
                expected = table.value_at(idx[b] - idx[a])
                assert toeplitz.matrix[a, b] == pytest.approx(expected)

    def test_hermitian_for_real_coefficients(self):
        ens = DiracEnsemble(
            points=(canonicalize([0.2, 0.4]), canonicalize([0.6, 0.9])),
            coefficients=(1.0, 2.5),
        )
        toeplitz = build_toeplitz(compute_moments(ens, 2))
        np.testing.assert_allclose(toeplitz.matrix, toeplitz.matrix.conj().T, atol=1e-12)


class TestFactorization:
    @pytest.mark.parametrize("seed,d,m,n", [(0, 1, 4, 5), (1, 2, 5, 4), (2, 3, 6, 3)])
    def test_residual_tiny(self, seed, d, m, n):
        ens = seeded_ensemble(seed, d, m, 0.15 if d > 1 else 0.1)
        toeplitz = build_toeplitz(compute_moments(ens, n))
        norm = np.linalg.norm(toeplitz.matrix)
        assert factorization_residual(ens, n) <= 1e-10 * norm

    def test_single_spike_machine_precision(self):
        ens = DiracEnsemble(points=(canonicalize([0.3]),), coefficients=(2.0,))
        assert factorization_residual(ens, 4) <= 1e-12

    def test_perturbed_diagonal_breaks_identity(self):
        ens = seeded_ensemble(9, 1, 3, 0.2)
        n = 3
        toeplitz = build_toeplitz(compute_moments(ens, n))
        vand = build_vandermonde(ens, n).matrix
        bad_d = ens.coefficients_array * 1.01
        product = vand.conj().T @ (bad_d[:, None] * vand)
        assert np.linalg.norm(toeplitz.matrix - product) > 1e-3

    def test_rank_of_toeplitz_equals_rank_of_vandermonde(self):
        for seed in range(4):
            ens = seeded_ensemble(seed, 2, 4, 0.2)
            n = 3
            rank_t = numerical_rank(build_toeplitz(compute_moments(ens, n)).matrix).rank
            rank_a = numerical_rank(build_vandermonde(ens, n).matrix).rank
            assert rank_t == rank_a


class TestNumericalRank:
    def test_all_ones_matrix(self):
        assert numerical_rank(np.ones((4, 7))).rank == 1

    def test_separated_univariate_full_rank(self):
        ens = DiracEnsemble(
            points=tuple(canonicalize([t]) for t in (0.0, 0.2, 0.4)),
            coefficients=(1, 1, 1),
        )
        result = numerical_rank(build_vandermonde(ens, 6).matrix)
        assert result.rank == 3
        assert result.singular_values.shape == (3,)

    def test_dense_grid_is_rank_deficient(self):
        # (n+1)q < 1 forces rank at most n+1 < M
        ens = grid_ensemble(1, 10)
        result = numerical_rank(build_vandermonde(ens, 8).matrix)
        assert result.rank == 9
        assert result.rank < ens.size

    def test_tolerance_is_adjustable(self):
        matrix = np.diag([1.0, 1e-5, 1e-12])
        assert numerical_rank(matrix, rel_tol=1e-8).rank == 2
        assert numerical_rank(matrix, rel_tol=1e-3).rank == 1

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            numerical_rank(np.array([[np.nan, 0.0]]))


class TestConditioning:
    def test_univariate_grid_value(self):
        # 4 equispaced points, (n+1)q = 4.5 -> kappa = 5/4
        ens = grid_ensemble(1, 4)
        report = condition_report(ens, 17)
        assert report.kappa == pytest.approx(1.25, rel=1e-10)
        assert report.theoretical_lower == pytest.approx(1.25)
        assert report.equispaced_grid

    def test_bivariate_grid_tensor_value(self):
        ens = grid_ensemble(2, 4)
        report = condition_report(ens, 17)
        assert report.kappa == pytest.approx(1.5625, rel=1e-10)
        assert report.theoretical_lower == pytest.approx(1.5625)

    def test_rank_deficient_reports_infinite(self):
        ens = grid_ensemble(1, 10)
        report = condition_report(ens, 8)
        assert report.kappa == np.inf
        assert report.rank < ens.size

    def test_formula_level_large_dimension(self):
        value = equispaced_kappa_formula(4.5, 256)
        assert value == pytest.approx(1.25**256)
        assert value >= 1e24

    def test_non_grid_ensemble_has_no_reference(self):
        ens = seeded_ensemble(11, 2, 3, 0.2)
        report = condition_report(ens, 6)
        assert report.theoretical_lower is None
        assert report.kappa >= 1.0


class TestKernelInclusion:
    def test_vandermonde_kernel_inside_toeplitz_kernel(self):
        from torusprony import kernel_basis_of_vandermonde

        ens = seeded_ensemble(13, 2, 4, 0.2)
        n = 4
        basis_a = kernel_basis_of_vandermonde(build_vandermonde(ens, n))
        toeplitz = build_toeplitz(compute_moments(ens, n))
        norm_t = np.linalg.norm(toeplitz.matrix)
        for vec in basis_a.vectors:
            assert np.linalg.norm(toeplitz.matrix @ vec) <= 1e-8 * norm_t
        # equality of kernels when the Vandermonde has full rank M
        basis_t = kernel_basis(toeplitz)
        assert basis_a.kernel_dim == basis_t.kernel_dim


class TestSerialization:
    def test_moment_table_round_trip(self, tmp_path):
        ens = seeded_ensemble(15, 2, 3, 0.2)
        table = compute_moments(ens, 2)
        path = tmp_path / "moments.json"
        table.save(path)
        loaded = MomentTable.load(path)
        assert loaded.box == table.box
        np.testing.assert_array_equal(loaded.values, table.values)

    def test_matrix_csv_cells_parse_back(self, tmp_path):
        matrix = np.array([[1.5 + 0.5j, -2.0 - 1.0j], [0.0 + 0.0j, 3.25 - 0.125j]])
        path = tmp_path / "matrix.csv"
        write_matrix_csv(path, matrix)
        rows = path.read_text().strip().splitlines()
        parsed = np.array(
            [[complex(cell.replace("i", "j")) for cell in row.split(",")] for row in rows]
        )
        np.testing.assert_array_equal(parsed, matrix)
