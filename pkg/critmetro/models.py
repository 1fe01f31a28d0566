"""
The three periodic spin-chain models and their global spin operators.

FerroIsing      H = -sum_i [ s^z_i s^z_{i+1} + h_x s^x_i + h_y s^y_i + h_z s^z_i ]
AntiferroIsing  H =  sum_i s^z_i s^z_{i+1} - sum_i [ h_x s^x_i + h_y s^y_i + h_z s^z_i ]
XYChain         H = -sum_i [ (1+gamma)/2 s^x_i s^x_{i+1} + (1-gamma)/2 s^y_i s^y_{i+1} + lambda s^z_i ]

Site n is identified with site 0.
"""
import dataclasses
import enum

import numpy as np

from .operators import SparseOperator, SpinAxis, pauli_sum
from .utils import basis_indices, popcount

MAX_SITES = 20


class ModelKind(str, enum.Enum):
    FERRO_ISING = 'ferro'
    ANTIFERRO_ISING = 'antiferro'
    XY_CHAIN = 'xy'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {'ferroising': 'ferro', 'antiferroising': 'antiferro', 'xychain': 'xy'}
        key = str(value).lower().replace('_', '').replace('-', '')
        return cls(aliases.get(key, key))


ISING_PARAMETERS = ('hx', 'hy', 'hz')
XY_PARAMETERS = ('gamma', 'lambda')


@dataclasses.dataclass(frozen=True)
class ModelSpec:
    """
    Chain model, size and couplings. Ising kinds use the fields hx, hy, hz;
    XYChain uses gamma (anisotropy, in (0, 1]) and lam (transverse field, >= 0).
    """

    kind: ModelKind
    n: int
    hx: float = 0.
    hy: float = 0.
    hz: float = 0.
    gamma: float = 1.
    lam: float = 0.

    def __post_init__(self):
        object.__setattr__(self, 'kind', ModelKind.parse(self.kind))
        if self.n < 3:
            raise ValueError(f'periodic chains need n >= 3 spins, got {self.n}')
        if self.kind is ModelKind.XY_CHAIN:
            if not 0 < self.gamma <= 1:
                raise ValueError(f'gamma must lie in (0, 1], got {self.gamma}')
            if self.lam < 0:
                raise ValueError(f'lambda must be non-negative, got {self.lam}')

    @property
    def is_ising(self):
        return self.kind is not ModelKind.XY_CHAIN

    @property
    def parameters(self):
        return ISING_PARAMETERS if self.is_ising else XY_PARAMETERS

    @property
    def field(self):
        return np.array([self.hx, self.hy, self.hz])

    def param(self, label):
        if label not in self.parameters:
            raise ValueError(f'{label!r} is not a parameter of the {self.kind.value} model')
        return self.lam if label == 'lambda' else getattr(self, label)

    def with_params(self, **changes):
        """Copy with some couplings (by parameter label) or n replaced."""
        fields = {}
        for label, value in changes.items():
            if label == 'n':
                fields['n'] = int(value)
            else:
                self.param(label)
                fields['lam' if label == 'lambda' else label] = float(value)
        return dataclasses.replace(self, **fields)

    def shifted(self, shift):
        """Copy with the field vector (h_x, h_y, h_z) displaced by `shift`."""
        if not self.is_ising:
            raise ValueError('field shifts are defined for the Ising models only')
        hx, hy, hz = self.field + np.asarray(shift, dtype=float)
        return dataclasses.replace(self, hx=float(hx), hy=float(hy), hz=float(hz))

    def first_order_line(self):
        """
        The first-order line crossing this point, as (axis, value), or None.

        In the ferromagnet with transverse field below 1 the ground state
        switches magnetization branch across h_z = 0.
        """
        if self.kind is ModelKind.FERRO_ISING and self.hx ** 2 + self.hy ** 2 < 1:
            return SpinAxis.Z, 0.
        return None

    def on_first_order_surface(self):
        line = self.first_order_line()
        return line is not None and self.field[line[0].index] == line[1]

    def transverse_field_plane(self):
        """Ising model with h_z = 0 and a nonzero transverse field."""
        return self.is_ising and self.hz == 0 and (self.hx != 0 or self.hy != 0)


def check_size(n, max_sites=MAX_SITES):
    if n < 3:
        raise ValueError(f'periodic chains need n >= 3 spins, got {n}')
    if n > max_sites:
        raise ValueError(f'{n} spins exceed the memory cap of {max_sites} spins')


def hamiltonian_terms(spec):
    """(coefficient, Pauli string) pairs of the model Hamiltonian."""
    n = spec.n
    bonds = [(i, (i + 1) % n) for i in range(n)]

    if spec.kind is ModelKind.XY_CHAIN:
        jx, jy = (1 + spec.gamma) / 2, (1 - spec.gamma) / 2
        for i, j in bonds:
            yield -jx, {i: 'x', j: 'x'}
            yield -jy, {i: 'y', j: 'y'}
        for i in range(n):
            yield -spec.lam, {i: 'z'}
        return

    coupling = -1. if spec.kind is ModelKind.FERRO_ISING else 1.
    for i, j in bonds:
        yield coupling, {i: 'z', j: 'z'}
    for axis, h in zip('xyz', spec.field):
        for i in range(n):
            yield -h, {i: axis}


def build_hamiltonian(spec, max_sites=MAX_SITES):
    check_size(spec.n, max_sites)
    return pauli_sum(spec.n, hamiltonian_terms(spec))


def build_global_spin(n, axis, max_sites=MAX_SITES):
    """S_axis = sum_i sigma^axis_i / 2"""
    check_size(n, max_sites)
    axis = SpinAxis(axis)
    return pauli_sum(n, [(0.5, {i: axis}) for i in range(n)])


def build_staggered_spin(n, axis=SpinAxis.Z, max_sites=MAX_SITES):
    """sum_i (-1)^i sigma^axis_i / 2"""
    check_size(n, max_sites)
    axis = SpinAxis(axis)
    return pauli_sum(n, [(0.5 * (-1) ** i, {i: axis}) for i in range(n)])


def order_parameter(spec, max_sites=MAX_SITES):
    """Magnetization used to pick a branch of a degenerate ground doublet."""
    if spec.kind is ModelKind.ANTIFERRO_ISING:
        return build_staggered_spin(spec.n, SpinAxis.Z, max_sites)
    return build_global_spin(spec.n, SpinAxis.Z, max_sites)


def build_transverse_parity(spec, max_sites=MAX_SITES):
    """
    prod_i (cos phi s^x_i + sin phi s^y_i) for the field direction phi in the
    (h_x, h_y) plane. With h_z = 0 it commutes with both Ising Hamiltonians,
    and their ground state is its +1 eigenstate.
    """
    check_size(spec.n, max_sites)
    phi = np.arctan2(spec.hy, spec.hx)
    idx = basis_indices(spec.n)
    dim = 2 ** spec.n
    phases = np.exp(1j * phi * (spec.n - 2 * popcount(idx)))
    return SparseOperator.from_triplets(idx ^ (dim - 1), idx, phases, dim, hermitian=True)
