"""
Exact dense linear algebra over a prime field GF(p).

Matrices are two-dimensional numpy int64 arrays whose entries are kept as
canonical residues in [0, p). Every rank, kernel and limit/colimit computation
in the package goes through a FieldSpec instance.
"""
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

MAX_MODULUS = 1 << 16

SeedLike = Union[int, np.random.Generator, None]


class ShapeError(ValueError):
    """Raised when matrix dimensions do not agree."""
    pass


class FieldError(ValueError):
    """Raised for an invalid modulus or an element without an inverse."""
    pass


def is_prime(value: int) -> bool:
    """
    Check primality by trial division.

    Args:
        value: Candidate modulus

    Returns:
        bool: True when value is prime
    """
    if value < 2:
        return False
    if value < 4:
        return True
    if value % 2 == 0:
        return False
    divisor = 3
    while divisor * divisor <= value:
        if value % divisor == 0:
            return False
        divisor += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """
    The prime field GF(p) together with the matrix operations over it.

    Instances are immutable and every method is a pure function of its
    arguments, so a single FieldSpec can be shared freely.

    Args:
        p: Prime modulus, below 2^16 so that products fit comfortably in int64
    """
    p: int = 2

    def __post_init__(self):
        if isinstance(self.p, bool) or not isinstance(self.p, (int, np.integer)):
            raise FieldError(f"Field modulus must be an integer, got {self.p!r}")
        if not is_prime(int(self.p)) or int(self.p) >= MAX_MODULUS:
            raise FieldError(f"Field modulus must be a prime below {MAX_MODULUS}, got {self.p}")
        object.__setattr__(self, 'p', int(self.p))

    def __str__(self) -> str:
        return f"GF({self.p})"

    # Construction helpers

    def as_matrix(self, values, shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
        """
        Convert nested rows (or an array) into a canonical matrix.

        Args:
            values: Array-like of integers
            shape: Explicit (rows, cols), required to express empty shapes from lists

        Returns:
            np.ndarray: 2-D int64 array with entries in [0, p)

        Raises:
            ShapeError: If the data is not two-dimensional or disagrees with shape
        """
        matrix = np.asarray(values, dtype=np.int64)
        if shape is not None:
            if matrix.size == 0 and shape[0] * shape[1] == 0:
                matrix = np.zeros(shape, dtype=np.int64)
            elif matrix.shape != tuple(shape):
                raise ShapeError(f"Expected a {shape[0]}x{shape[1]} matrix, got shape {matrix.shape}")
        if matrix.ndim != 2:
            raise ShapeError(f"Matrices must be two-dimensional, got {matrix.ndim} dimensions")
        return np.mod(matrix, self.p)

    def zeros(self, rows: int, cols: int) -> np.ndarray:
        return np.zeros((rows, cols), dtype=np.int64)

    def identity(self, dim: int) -> np.ndarray:
        return np.eye(dim, dtype=np.int64)

    def negate(self, matrix: np.ndarray) -> np.ndarray:
        return np.mod(-np.asarray(matrix, dtype=np.int64), self.p)

    def block_diag(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        """Assemble a block-diagonal matrix; empty blocks keep their shapes."""
        rows = sum(block.shape[0] for block in blocks)
        cols = sum(block.shape[1] for block in blocks)
        result = self.zeros(rows, cols)
        r = c = 0
        for block in blocks:
            result[r:r + block.shape[0], c:c + block.shape[1]] = block
            r += block.shape[0]
            c += block.shape[1]
        return result

    # Scalar arithmetic

    def inverse_scalar(self, value: int) -> int:
        """
        Multiplicative inverse of a nonzero residue.

        Raises:
            FieldError: If value is zero modulo p
        """
        residue = int(value) % self.p
        if residue == 0:
            raise FieldError(f"0 has no inverse in {self}")
        return pow(residue, -1, self.p)

    # Matrix arithmetic

    def mat_mul(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """
        Exact product modulo p.

        Raises:
            ShapeError: If left.cols != right.rows
        """
        if left.shape[1] != right.shape[0]:
            raise ShapeError(
                f"Cannot multiply {left.shape[0]}x{left.shape[1]} by {right.shape[0]}x{right.shape[1]}"
            )
        return np.mod(left @ right, self.p)

    def rref(self, matrix: np.ndarray) -> Tuple[np.ndarray, List[int]]:
        """
        Reduced row-echelon form.

        Args:
            matrix: Matrix over this field

        Returns:
            Tuple of the reduced matrix and the strictly increasing pivot columns
        """
        reduced = self.as_matrix(matrix).copy()
        rows, cols = reduced.shape
        pivots: List[int] = []
        r = 0
        for c in range(cols):
            if r == rows:
                break
            candidates = np.flatnonzero(reduced[r:, c])
            if candidates.size == 0:
                continue
            pivot_row = r + int(candidates[0])
            if pivot_row != r:
                reduced[[r, pivot_row]] = reduced[[pivot_row, r]]
            reduced[r] = np.mod(reduced[r] * self.inverse_scalar(reduced[r, c]), self.p)
            factors = reduced[:, c].copy()
            factors[r] = 0
            if factors.any():
                reduced = np.mod(reduced - np.outer(factors, reduced[r]), self.p)
            pivots.append(c)
            r += 1
        return reduced, pivots

    def rank(self, matrix: np.ndarray) -> int:
        """Rank by forward elimination (no back substitution)."""
        work = self.as_matrix(matrix).copy()
        rows, cols = work.shape
        r = 0
        for c in range(cols):
            if r == rows:
                break
            candidates = np.flatnonzero(work[r:, c])
            if candidates.size == 0:
                continue
            pivot_row = r + int(candidates[0])
            if pivot_row != r:
                work[[r, pivot_row]] = work[[pivot_row, r]]
            below = work[r + 1:, c]
            if below.any():
                scale = np.mod(below * self.inverse_scalar(work[r, c]), self.p)
                work[r + 1:] = np.mod(work[r + 1:] - np.outer(scale, work[r]), self.p)
            r += 1
        return r

    def kernel_basis(self, matrix: np.ndarray) -> np.ndarray:
        """
        Basis of the right null space.

        Returns:
            np.ndarray: cols x (cols - rank) matrix whose columns span ker(matrix)
        """
        matrix = self.as_matrix(matrix)
        cols = matrix.shape[1]
        reduced, pivots = self.rref(matrix)
        pivot_set = set(pivots)
        free = [c for c in range(cols) if c not in pivot_set]
        basis = self.zeros(cols, len(free))
        for k, column in enumerate(free):
            basis[column, k] = 1
            if pivots:
                basis[pivots, k] = np.mod(-reduced[:len(pivots), column], self.p)
        return basis

    def left_kernel_basis(self, matrix: np.ndarray) -> np.ndarray:
        """Rows spanning {y : y . matrix = 0}; a quotient map onto the cokernel."""
        return self.kernel_basis(self.as_matrix(matrix).T).T

    def column_basis(self, matrix: np.ndarray) -> np.ndarray:
        """Linearly independent columns of matrix spanning its column space."""
        matrix = self.as_matrix(matrix)
        _, pivots = self.rref(matrix)
        return matrix[:, pivots]

    def inverse(self, matrix: np.ndarray) -> np.ndarray:
        """
        Inverse of a square matrix by Gauss-Jordan elimination.

        Raises:
            ShapeError: If the matrix is not square
            FieldError: If the matrix is singular
        """
        matrix = self.as_matrix(matrix)
        dim = matrix.shape[0]
        if matrix.shape[1] != dim:
            raise ShapeError(f"Only square matrices are invertible, got {matrix.shape}")
        reduced, pivots = self.rref(np.hstack([matrix, self.identity(dim)]))
        if pivots[:dim] != list(range(dim)):
            raise FieldError(f"Matrix is singular over {self}")
        return reduced[:, dim:]

    def is_invertible(self, matrix: np.ndarray) -> bool:
        return matrix.shape[0] == matrix.shape[1] and self.rank(matrix) == matrix.shape[0]

    # Randomness

    def random_matrix(self, rows: int, cols: int, seed: SeedLike = None) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return rng.integers(0, self.p, size=(rows, cols), dtype=np.int64)

    def random_invertible(self, dim: int, seed: SeedLike = None) -> np.ndarray:
        """
        Random invertible matrix built as P . L . U.

        Args:
            dim: Size of the square matrix, may be 0
            seed: Integer seed or numpy Generator; integer seeds are reproducible

        Returns:
            np.ndarray: dim x dim matrix of full rank
        """
        if dim < 0:
            raise ShapeError(f"Dimension must be non-negative, got {dim}")
        rng = np.random.default_rng(seed)
        lower = np.tril(rng.integers(0, self.p, size=(dim, dim), dtype=np.int64), -1)
        lower += self.identity(dim)
        upper = np.triu(rng.integers(0, self.p, size=(dim, dim), dtype=np.int64), 1)
        upper += np.diag(rng.integers(1, self.p, size=dim, dtype=np.int64))
        permutation = self.identity(dim)[rng.permutation(dim)]
        return self.mat_mul(permutation, self.mat_mul(lower, upper))

    def entries_valid(self, values: Iterable[int]) -> bool:
        """True when every value is already a canonical residue."""
        return all(0 <= int(v) < self.p for v in values)
