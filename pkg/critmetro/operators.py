"""
Sparse Hermitian operators on the 2^n dimensional spin Hilbert space.

Pauli matrices act on basis indices by bit manipulation: sigma^z_i is
diagonal with the sign of bit i, sigma^x_i flips bit i and sigma^y_i flips
bit i with a factor +i (bit 0) or -i (bit 1).
"""
import enum
import numbers

import numpy as np
import scipy.sparse as sparse

from .utils import basis_indices, bit_signs, flip_mask


class SpinAxis(str, enum.Enum):
    """ Spin direction. The order x < y < z fixes matrix layouts everywhere. """
    X = 'x'
    Y = 'y'
    Z = 'z'

    @property
    def index(self):
        return 'xyz'.index(self.value)

    @classmethod
    def parse(cls, labels):
        """ Sorted tuple of axes from labels like "xz" or ["z", "x"]. """
        axes = {cls(str(label).lower()[-1]) for label in labels}
        return tuple(sorted(axes, key=lambda a: a.index))


AXES = (SpinAxis.X, SpinAxis.Y, SpinAxis.Z)


class SparseOperator(object):
    """
    Operator on the computational basis stored as a compressed sparse row matrix.

    Duplicate triplets are summed and explicit zeros dropped at construction,
    so rows are sorted and columns unique. Instances are never modified after
    construction and can be shared between workers.

    :param matrix: anything scipy.sparse.csr_matrix accepts
    :param hermitian: whether the operator is known to be Hermitian
    """

    def __init__(self, matrix, hermitian=False):
        matrix = sparse.csr_matrix(matrix, dtype=complex)
        matrix.sum_duplicates()
        matrix.eliminate_zeros()
        matrix.sort_indices()

        dim = matrix.shape[0]
        if matrix.shape != (dim, dim):
            raise ValueError(f'operator must be square, got shape {matrix.shape}')
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f'dimension {dim} is not a power of two')

        self._matrix = matrix
        self.dim = dim
        self.hermitian = bool(hermitian)

    @classmethod
    def from_triplets(cls, rows, cols, values, dim, hermitian=False):
        mat = sparse.coo_matrix((values, (rows, cols)), shape=(dim, dim))
        return cls(mat, hermitian)

    @classmethod
    def identity(cls, dim):
        return cls(sparse.identity(dim, dtype=complex, format='csr'), hermitian=True)

    @property
    def n_sites(self):
        return self.dim.bit_length() - 1

    @property
    def matrix(self):
        return self._matrix

    @property
    def nnz(self):
        return self._matrix.nnz

    @property
    def entries(self):
        """ (row, column, value) triplets in row-major order. """
        coo = self._matrix.tocoo()
        return list(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))

    def toarray(self):
        return self._matrix.toarray()

    def apply(self, v):
        """ Sparse matrix-vector (or matrix-block) product. """
        v = np.asarray(v)
        if v.shape[0] != self.dim:
            raise ValueError(f'dimension mismatch: operator {self.dim}, vector {v.shape[0]}')
        return self._matrix @ v

    def __call__(self, v):
        return self.apply(v)

    def expectation(self, v):
        return np.vdot(v, self.apply(v))

    def is_hermitian(self, atol=0.):
        diff = self._matrix - self._matrix.conj().T
        if diff.nnz == 0:
            return True
        return np.max(np.abs(diff.data)) <= atol

    def __add__(self, other):
        if isinstance(other, numbers.Number) and other == 0:
            return self
        if not isinstance(other, SparseOperator):
            return NotImplemented
        self._check_dim(other)
        return SparseOperator(self._matrix + other._matrix, self.hermitian and other.hermitian)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        if not isinstance(other, SparseOperator):
            return NotImplemented
        self._check_dim(other)
        return SparseOperator(self._matrix - other._matrix, self.hermitian and other.hermitian)

    def __neg__(self):
        return SparseOperator(-self._matrix, self.hermitian)

    def __mul__(self, other):
        if not isinstance(other, numbers.Number):
            return NotImplemented
        return SparseOperator(other * self._matrix, self.hermitian and np.imag(other) == 0)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            self._check_dim(other)
            return SparseOperator(self._matrix @ other._matrix)
        return self.apply(other)

    def _check_dim(self, other):
        if other.dim != self.dim:
            raise ValueError(f'dimension mismatch: {self.dim} vs {other.dim}')


def commutator(a, b):
    return a @ b - b @ a


def pauli_triplets(n, ops, coef=1.):
    """
    Coordinate triplets of ``coef`` times a product of Pauli matrices on distinct sites.

    :param n: number of spins
    :param ops: dict mapping site index (0-based) to a SpinAxis or 'x', 'y', 'z'
    :return: rows, cols, values arrays
    """
    idx = basis_indices(n)
    values = np.full(len(idx), coef, dtype=complex)
    flipped = []
    for site, axis in ops.items():
        if not 0 <= site < n:
            raise ValueError(f'site {site} outside chain of {n} spins')
        axis = SpinAxis(axis)
        if axis is SpinAxis.Z:
            values *= bit_signs(idx, site)
        elif axis is SpinAxis.Y:
            values *= 1j * bit_signs(idx, site)
            flipped.append(site)
        else:
            flipped.append(site)
    return idx ^ flip_mask(flipped), idx, values


def pauli_string(n, ops):
    return SparseOperator.from_triplets(*pauli_triplets(n, ops), 2 ** n, hermitian=True)


def pauli_sum(n, terms):
    """
    Sum of weighted Pauli strings, assembled from one concatenated triplet list.

    :param terms: iterable of (coefficient, ops) pairs
    """
    rows, cols, values = [], [], []
    hermitian = True
    for coef, ops in terms:
        if coef == 0:
            continue
        r, c, v = pauli_triplets(n, ops, coef)
        rows.append(r)
        cols.append(c)
        values.append(v)
        hermitian = hermitian and np.imag(coef) == 0
    if not rows:
        return SparseOperator(sparse.csr_matrix((2 ** n, 2 ** n), dtype=complex), hermitian=True)
    return SparseOperator.from_triplets(np.concatenate(rows), np.concatenate(cols),
                                        np.concatenate(values), 2 ** n, hermitian)
