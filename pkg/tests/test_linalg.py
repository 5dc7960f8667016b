import numpy as np
import pytest

from splitproj.linalg import (
    as_matrix,
    block_matrix,
    eigenvalues,
    format_matrix,
    matmul,
    operator_norm,
    parse_matrix,
    pseudo_inverse,
    spectral_radius,
    split_blocks,
    symmetric_eig,
)

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


def naive_matmul(a, b):
    # independent triple-loop reference
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            acc = 0.0
            for k in range(a.shape[1]):
                acc += a[i, k] * b[k, j]
            out[i, j] = acc
    return out


class TestMatmul:
    def test_identity(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(matmul(np.eye(2), a), a)

    def test_nilpotent_square(self):
        n = np.array([[0.0, 1.0], [0.0, 0.0]])
        assert np.array_equal(matmul(n, n), np.zeros((2, 2)))

    def test_against_triple_loop(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((3, 4))
        b = rng.standard_normal((4, 2))
        assert np.linalg.norm(matmul(a, b) - naive_matmul(a, b)) < 1e-13

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            matmul(np.eye(2), np.eye(3))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            as_matrix([[np.nan, 0.0]])
        with pytest.raises(ValueError, match="non-finite"):
            matmul(np.eye(2), [[1.0, np.inf], [0.0, 1.0]])


class TestBlocks:
    def test_scalar_grid(self):
        m = block_matrix([[np.array([[1.0]]), np.array([[2.0]])],
                          [np.array([[3.0]]), np.array([[4.0]])]])
        assert np.array_equal(m, np.array([[1.0, 2.0], [3.0, 4.0]]))

    def test_identity_grid(self):
        z = np.zeros((2, 2))
        m = block_matrix([[np.eye(2), z], [z, np.eye(2)]])
        assert np.array_equal(m, np.eye(4))

    def test_ragged_grid_rejected(self):
        with pytest.raises(ValueError):
            block_matrix([[np.eye(2), np.zeros((3, 2))]])
        with pytest.raises(ValueError):
            block_matrix([[np.eye(2)], [np.zeros((2, 3))]])

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        rows, cols = (2, 3, 1), (4, 2)
        blocks = [[rng.standard_normal((r, c)) for c in cols] for r in rows]
        back = split_blocks(block_matrix(blocks), rows, cols)
        for row_a, row_b in zip(blocks, back):
            for a, b in zip(row_a, row_b):
                assert np.array_equal(a, b)


class TestSymmetricEig:
    def test_diagonal(self):
        res = symmetric_eig(np.diag([3.0, 1.0]))
        assert np.allclose(res.eigenvalues, [3.0, 1.0])
        assert np.allclose(np.abs(res.eigenvectors), np.eye(2))

    def test_exchange_matrix(self):
        res = symmetric_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(res.eigenvalues, [1.0, -1.0])

    def test_reconstruction_random(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((6, 6))
        a = a + a.T
        values, vectors = symmetric_eig(a)
        rebuilt = vectors @ np.diag(values) @ vectors.T
        assert np.linalg.norm(rebuilt - a) <= 1e-10 * (1.0 + np.linalg.norm(a))
        assert np.linalg.norm(vectors.T @ vectors - np.eye(6)) < 1e-12

    def test_rejects_non_square_and_asymmetric(self):
        with pytest.raises(ValueError):
            symmetric_eig(np.ones((2, 3)))
        with pytest.raises(ValueError, match="symmetric"):
            symmetric_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestPseudoInverse:
    def test_projector_is_own_pseudoinverse(self):
        p = np.array([[1.0, 0.0], [0.0, 0.0]])
        assert np.allclose(pseudo_inverse(p), p, atol=1e-14)

    def test_rank_one(self):
        # A^+ = A^T / sigma^2 with sigma^2 = 4
        a = np.array([[0.0, 2.0], [0.0, 0.0]])
        assert np.allclose(pseudo_inverse(a), np.array([[0.0, 0.0], [0.5, 0.0]]), atol=1e-14)

    def test_penrose_conditions_random(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((6, 5))
        ap = pseudo_inverse(a)
        tol = 1e-9 * (1.0 + np.linalg.norm(a))
        assert np.linalg.norm(a @ ap @ a - a) <= tol
        assert np.linalg.norm(ap @ a @ ap - ap) <= tol
        assert np.linalg.norm((a @ ap).T - a @ ap) <= tol
        assert np.linalg.norm((ap @ a).T - ap @ a) <= tol


class TestEigenvalues:
    def test_rotation(self):
        ev = sorted(eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]])), key=lambda z: z.imag)
        assert abs(ev[0] - (-1j)) < 1e-14
        assert abs(ev[1] - 1j) < 1e-14

    def test_triangular(self):
        a = np.triu(np.ones((3, 3)))
        a[0, 0], a[1, 1], a[2, 2] = 2.0, -1.0, 0.5
        assert np.allclose(sorted(eigenvalues(a).real), [-1.0, 0.5, 2.0], atol=1e-13)

    def test_companion_of_golden_ratio_polynomial(self):
        # x^2 - x - 1: trace 1, determinant -1
        c = np.array([[0.0, 1.0], [1.0, 1.0]])
        ev = sorted(eigenvalues(c).real)
        assert abs(ev[1] - GOLDEN) < 1e-14
        assert abs(ev[0] - (1.0 - GOLDEN)) < 1e-14

    def test_conjugate_closed(self):
        rng = np.random.default_rng(4)
        ev = eigenvalues(rng.standard_normal((7, 7)))
        paired = sorted(ev, key=lambda z: (round(z.real, 9), z.imag))
        conj = sorted(np.conj(ev), key=lambda z: (round(z.real, 9), z.imag))
        assert np.allclose(paired, conj, atol=1e-9)

    def test_characteristic_polynomial_residual(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((5, 5))
        for lam in eigenvalues(a):
            res = abs(np.linalg.det(a - lam * np.eye(5)))
            assert res < 1e-8

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            eigenvalues(np.ones((2, 3)))


class TestNormsAndRadius:
    def test_spectral_radius_examples(self):
        assert spectral_radius(np.zeros((3, 3))) == 0.0
        assert abs(spectral_radius(np.array([[0.0, -1.0], [1.0, 0.0]])) - 1.0) < 1e-14

    def test_operator_norm_examples(self):
        assert abs(operator_norm(np.diag([3.0, -2.0])) - 3.0) < 1e-14
        p = 0.5 * np.ones((2, 2))  # rank-1 projector
        assert abs(operator_norm(p) - 1.0) < 1e-12

    def test_radius_below_norm(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            a = rng.standard_normal((5, 5))
            assert spectral_radius(a) <= operator_norm(a) + 1e-10

    def test_norm_orthogonal_invariance(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((6, 6))
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        assert abs(operator_norm(q.T @ a @ q) - operator_norm(a)) < 1e-10

    def test_general_matches_symmetric_path(self):
        rng = np.random.default_rng(8)
        a = rng.standard_normal((6, 6))
        a = a + a.T
        general = sorted(eigenvalues(a).real)
        sym = sorted(symmetric_eig(a).eigenvalues)
        assert np.allclose(general, sym, atol=1e-8)


class TestTextFormat:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((4, 3)) * np.pi
        assert np.array_equal(parse_matrix(format_matrix(a)), a)

    def test_format_shape(self):
        text = format_matrix(np.array([[1.0, 0.5]]))
        lines = text.splitlines()
        assert lines[0] == "1 2"
        assert len(lines) == 2
        text.encode("ascii")

    def test_parse_errors(self):
        with pytest.raises(ValueError):
            parse_matrix("")
        with pytest.raises(ValueError):
            parse_matrix("2 2\n1 2\n3")
        with pytest.raises(ValueError):
            parse_matrix("junk\n1")
        with pytest.raises(ValueError, match="non-finite"):
            parse_matrix("1 2\nnan 1")
