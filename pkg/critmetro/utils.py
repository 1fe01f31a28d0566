"""Bit-level helpers for the computational basis of n spins.

Bit i of a basis-state integer encodes spin i; bit value 0 is the
sigma^z = +1 eigenstate.
"""
import numpy as np


def basis_indices(n):
    return np.arange(2 ** n, dtype=np.int64)


def bit_values(indices, site):
    return (indices >> site) & 1


def bit_signs(indices, site):
    """sigma^z eigenvalue (+1 or -1) of spin `site` for every basis index."""
    return 1 - 2 * bit_values(indices, site)


def flip_mask(sites):
    mask = 0
    for site in sites:
        mask |= 1 << site
    return mask


def popcount(indices):
    indices = np.asarray(indices, dtype=np.int64)
    count = np.zeros_like(indices)
    work = indices.copy()
    while np.any(work):
        count += work & 1
        work = work >> 1
    return count


def to_basis_index(bits):
    """Basis-state integer of a tuple of bit values, bits[i] being spin i."""
    index = 0
    for site, bit in enumerate(bits):
        index += int(bit) << site
    return index


def to_bit_tuple(index, n):
    return tuple((int(index) >> site) & 1 for site in range(n))


def translation_permutation(n):
    """Image of every basis index under the cyclic one-site shift i -> i+1 mod n."""
    indices = basis_indices(n)
    top = bit_values(indices, n - 1)
    return ((indices << 1) & (2 ** n - 1)) | top


def basis_state(n, index):
    v = np.zeros(2 ** n, dtype=complex)
    v[index] = 1.
    return v
