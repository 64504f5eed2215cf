"""
Unit tests for exact linear algebra over GF(p).
"""
import numpy as np
import pytest

from src.core.field_linalg import FieldSpec, FieldError, ShapeError, is_prime


class TestIsPrime:
    """Test cases for the primality helper."""

    def test_small_values(self):
        """Test primality of the first integers."""
        assert [v for v in range(20) if is_prime(v)] == [2, 3, 5, 7, 11, 13, 17, 19]

    def test_largest_allowed_prime(self):
        """Test the largest prime below the modulus bound."""
        assert is_prime(65521)
        assert not is_prime(65535)


class TestFieldSpec:
    """Test cases for FieldSpec construction and matrix helpers."""

    def setup_method(self):
        """Set up test fixtures."""
        self.gf2 = FieldSpec(2)
        self.gf5 = FieldSpec(5)

    def test_composite_modulus_rejected(self):
        """Test that a composite modulus is refused."""
        with pytest.raises(FieldError, match="prime below"):
            FieldSpec(4)

    def test_modulus_bound(self):
        """Test that primes at or above 2^16 are refused."""
        with pytest.raises(FieldError):
            FieldSpec(65537)

    def test_bool_modulus_rejected(self):
        """Test that booleans are not accepted as integers."""
        with pytest.raises(FieldError, match="must be an integer"):
            FieldSpec(True)

    def test_as_matrix_reduces_entries(self):
        """Test canonical reduction of negative and large entries."""
        matrix = self.gf5.as_matrix([[-1, 7], [5, 12]])
        assert matrix.dtype == np.int64
        assert matrix.tolist() == [[4, 2], [0, 2]]

    def test_as_matrix_empty_shapes(self):
        """Test that empty shapes survive construction from lists."""
        assert self.gf2.as_matrix([], shape=(0, 3)).shape == (0, 3)
        assert self.gf2.as_matrix([], shape=(2, 0)).shape == (2, 0)

    def test_as_matrix_shape_mismatch(self):
        """Test error when data disagrees with the declared shape."""
        with pytest.raises(ShapeError, match="Expected a 2x2 matrix"):
            self.gf2.as_matrix([[1, 0, 1]], shape=(2, 2))

    def test_as_matrix_rejects_vectors(self):
        """Test that one-dimensional data is refused."""
        with pytest.raises(ShapeError, match="two-dimensional"):
            self.gf2.as_matrix([1, 0, 1])

    def test_inverse_scalar(self):
        """Test scalar inverses and the zero case."""
        assert all(self.gf5.inverse_scalar(x) * x % 5 == 1 for x in range(1, 5))
        with pytest.raises(FieldError, match="no inverse"):
            self.gf5.inverse_scalar(10)

    def test_mat_mul_shape_error(self):
        """Test error on incompatible products."""
        with pytest.raises(ShapeError, match="Cannot multiply"):
            self.gf2.mat_mul(self.gf2.zeros(2, 3), self.gf2.zeros(2, 3))

    def test_rank_over_different_fields(self):
        """Test that rank depends on the characteristic."""
        matrix = [[1, 1], [1, -1]]
        assert self.gf2.rank(self.gf2.as_matrix(matrix)) == 1
        assert self.gf5.rank(self.gf5.as_matrix(matrix)) == 2

    def test_rank_of_empty_matrix(self):
        """Test rank of matrices with a zero dimension."""
        assert self.gf5.rank(self.gf5.zeros(0, 4)) == 0
        assert self.gf5.rank(self.gf5.zeros(3, 0)) == 0

    def test_rref_pivots(self):
        """Test reduced row-echelon form and its pivot columns."""
        reduced, pivots = self.gf5.rref(self.gf5.as_matrix([[0, 2, 4], [0, 1, 3]]))
        assert pivots == [1, 2]
        assert reduced.tolist() == [[0, 1, 0], [0, 0, 1]]

    def test_kernel_basis_annihilates(self):
        """Test that kernel columns are mapped to zero and have the right count."""
        rng = np.random.default_rng(3)
        for _ in range(20):
            matrix = self.gf5.random_matrix(3, 6, rng)
            kernel = self.gf5.kernel_basis(matrix)
            assert kernel.shape == (6, 6 - self.gf5.rank(matrix))
            assert not self.gf5.mat_mul(matrix, kernel).any()
            assert self.gf5.rank(kernel) == kernel.shape[1]

    def test_left_kernel_basis(self):
        """Test that left kernel rows annihilate from the left."""
        matrix = self.gf2.as_matrix([[1, 0], [1, 0], [0, 1]])
        left = self.gf2.left_kernel_basis(matrix)
        assert left.shape == (1, 3)
        assert not self.gf2.mat_mul(left, matrix).any()

    def test_column_basis(self):
        """Test extraction of independent columns."""
        matrix = self.gf5.as_matrix([[1, 2, 0], [2, 4, 1]])
        basis = self.gf5.column_basis(matrix)
        assert basis.shape == (2, 2)
        assert self.gf5.rank(basis) == 2

    def test_inverse_round_trip(self):
        """Test that random invertible matrices invert exactly."""
        for dim in range(5):
            matrix = self.gf5.random_invertible(dim, seed=dim)
            assert self.gf5.is_invertible(matrix)
            product = self.gf5.mat_mul(matrix, self.gf5.inverse(matrix))
            assert np.array_equal(product, self.gf5.identity(dim))

    def test_inverse_singular(self):
        """Test error when inverting a singular matrix."""
        with pytest.raises(FieldError, match="singular"):
            self.gf2.inverse(self.gf2.as_matrix([[1, 1], [1, 1]]))

    def test_inverse_non_square(self):
        """Test error when inverting a rectangular matrix."""
        with pytest.raises(ShapeError, match="square"):
            self.gf2.inverse(self.gf2.zeros(2, 3))

    def test_random_invertible_is_reproducible(self):
        """Test that integer seeds reproduce the same matrix."""
        assert np.array_equal(self.gf5.random_invertible(4, seed=11), self.gf5.random_invertible(4, seed=11))

    def test_block_diag(self):
        """Test block-diagonal assembly with an empty block."""
        result = self.gf2.block_diag([self.gf2.identity(1), self.gf2.zeros(0, 2), self.gf2.identity(1)])
        assert result.shape == (2, 4)
        assert result.tolist() == [[1, 0, 0, 0], [0, 0, 0, 1]]

    def test_entries_valid(self):
        """Test residue validation used by the parsers."""
        assert self.gf5.entries_valid([0, 4, 3])
        assert not self.gf5.entries_valid([5])
        assert not self.gf5.entries_valid([-1])
