"""
The XY chain as free Majorana fermions.

With the Jordan-Wigner Majoranas a_2j = (prod_{k<j} s^z_k) s^x_j and
a_2j+1 = (prod_{k<j} s^z_k) s^y_j the chain becomes H = (i/4) sum A_mn a_m a_n
inside each sector of the parity P = prod s^z. The wrap bond changes sign
in the even sector (antiperiodic fermions). All ground-state spin moments
follow from Gamma_mn = i <a_m a_n> by Wick's theorem; string correlators
are Pfaffians of sub-blocks of Gamma.
"""
import dataclasses
import logging

import numpy as np
import scipy.linalg
from pfapack.pfaffian import pfaffian

from .metrology import assemble
from .families import RotatedFamily
from .operators import SpinAxis

logger = logging.getLogger(__name__)

MAX_FREE_SITES = 4096
SECTORS = ('even', 'odd')
PURITY_TOL = 1e-9


@dataclasses.dataclass
class FreeFermionSolution:
    """
    Ground state of the XY chain in one parity sector.

    `modes` are the single-particle energies (ascending), `majorana_corr`
    is the real antisymmetric matrix Gamma_mn = i <a_m a_n> (m != n).
    """

    n: int
    gamma: float
    lam: float
    modes: np.ndarray
    majorana_corr: np.ndarray
    energy: float
    parity: int
    sector: str = 'even'

    def purity_defect(self):
        """Largest deviation of a singular value of Gamma from 1."""
        s = np.linalg.svd(self.majorana_corr, compute_uv=False)
        return float(np.max(np.abs(s - 1)))

    def magnetization(self):
        """<s^z_j> for every site."""
        g = self.majorana_corr
        j = np.arange(self.n)
        return -g[2 * j, 2 * j + 1]


@dataclasses.dataclass
class SpinMoments:
    mean: np.ndarray
    cov: np.ndarray


def _check(n, gamma, lam, sector):
    if not 2 <= n <= MAX_FREE_SITES:
        raise ValueError(f'free-fermion chains need 2 <= n <= {MAX_FREE_SITES}, got {n}')
    if not 0 < gamma <= 1:
        raise ValueError(f'gamma must lie in (0, 1], got {gamma}')
    if lam < 0:
        raise ValueError(f'lambda must be non-negative, got {lam}')
    if sector not in SECTORS:
        raise ValueError(f'unknown parity sector {sector!r}')


def majorana_hamiltonian(n, gamma, lam, sector='even'):
    """Real antisymmetric A of H = (i/4) sum A_mn a_m a_n."""
    _check(n, gamma, lam, sector)
    jx, jy = (1 + gamma) / 2, (1 - gamma) / 2
    size = 2 * n
    j = np.arange(n)
    bond = np.ones(n)
    if sector == 'even':
        bond[-1] = -1.
    a = np.zeros((size, size))

    def add(m, k, c):
        np.add.at(a, (m, k), 2 * c)
        np.add.at(a, (k, m), -2 * c)

    add(2 * j, 2 * j + 1, lam * np.ones(n))
    add(2 * j + 1, (2 * j + 2) % size, jx * bond)
    add(2 * j, (2 * j + 3) % size, -jy * bond)
    return a


def allowed_momenta(n, sector='even'):
    m = np.arange(n)
    if sector == 'even':
        return np.pi * (2 * m + 1) / n
    return 2 * np.pi * m / n


def dispersion(k, gamma, lam):
    """Single-particle energy 2 sqrt((lambda - cos k)^2 + gamma^2 sin^2 k)."""
    k = np.asarray(k, dtype=float)
    return 2 * np.sqrt((lam - np.cos(k)) ** 2 + (gamma * np.sin(k)) ** 2)


def pfaffian_parity(corr):
    """(-1)^n Pf(Gamma) from the real Schur form, exact to a sign for pure states."""
    t, z = scipy.linalg.schur(corr, output='real')
    blocks = np.diag(t, 1)[::2]
    sign, _ = np.linalg.slogdet(z)
    pf = sign * np.prod(np.sign(blocks))
    n = corr.shape[0] // 2
    return int(round((-1) ** n * pf))


def solve_xy(n, gamma, lam, sector='even'):
    """
    Ground state of the XY chain in a parity sector.

    The Bogoliubov vacuum of the sector's quadratic Hamiltonian is used when
    its parity matches the sector; otherwise the lowest mode is occupied.

    :param n: number of sites
    :param gamma: anisotropy in (0, 1]
    :param lam: transverse field, >= 0
    :param sector: 'even' (P = +1) or 'odd' (P = -1)
    :return: FreeFermionSolution
    """
    a = majorana_hamiltonian(n, gamma, lam, sector)
    e, w = np.linalg.eigh(1j * a)
    modes = e[n:]
    signs = np.where(np.arange(2 * n) >= n, 1., -1.)
    sign_matrix = (w * signs) @ w.conj().T
    energy = -0.5 * float(np.sum(modes))

    corr = np.real(1j * sign_matrix)
    corr = (corr - corr.T) / 2
    parity = pfaffian_parity(corr)
    target = 1 if sector == 'even' else -1
    if parity != target:
        logger.debug('vacuum of the %s sector has parity %d, occupying the lowest mode',
                     sector, parity)
        plus = w[:, n]
        minus = plus.conj()
        sign_matrix = sign_matrix - 2 * np.outer(plus, plus.conj()) + 2 * np.outer(minus, minus.conj())
        energy += float(modes[0])
        corr = np.real(1j * sign_matrix)
        corr = (corr - corr.T) / 2
        parity = target

    sol = FreeFermionSolution(n=n, gamma=gamma, lam=lam, modes=modes, majorana_corr=corr,
                              energy=energy, parity=parity, sector=sector)
    defect = sol.purity_defect() if n <= 512 else 0.
    if defect > PURITY_TOL:
        logger.warning('Majorana correlation of n=%d is not pure (defect %.3g)', n, defect)
    return sol


def _pfaffian(block):
    value = float(np.real(pfaffian(block, method='H')))
    if not np.isfinite(value):
        raise ValueError(f'Pfaffian breakdown on a {block.shape[0]}x{block.shape[0]} block')
    return value


def string_indices(axis, i, j):
    """Majorana indices whose ordered product equals s^a_i s^a_j up to a phase."""
    if axis is SpinAxis.X:
        return np.arange(2 * i + 1, 2 * j + 1)
    first = np.arange(2 * i, 2 * j, 2)
    second = first + 3
    return np.column_stack([first, second]).ravel()


def string_correlator(sol, axis, i, j):
    """
    <s^a_i s^a_j> for i, j inside the chain.

    x and y strings are Pfaffians of sub-blocks of Gamma; zz follows from
    two-point contractions.
    """
    axis = SpinAxis(axis)
    i, j = sorted((i, j))
    if not 0 <= i <= j < sol.n:
        raise ValueError(f'sites {i}, {j} outside a chain of {sol.n}')
    if i == j:
        return 1.
    g = sol.majorana_corr
    if axis is SpinAxis.Z:
        mz = sol.magnetization()
        connected = -g[2 * i, 2 * j] * g[2 * i + 1, 2 * j + 1] + g[2 * i, 2 * j + 1] * g[2 * i + 1, 2 * j]
        return float(mz[i] * mz[j] + connected)
    idx = string_indices(axis, i, j)
    value = _pfaffian(g[np.ix_(idx, idx)])
    if axis is SpinAxis.X:
        value *= (-1) ** (j - i)
    return value


def _string_sum(sol, axis):
    """sum_{r=1}^{n-1} <s^a_0 s^a_r>, using C(r) = C(n - r)."""
    n = sol.n
    total = 0.
    for r in range(1, n // 2 + 1):
        c = string_correlator(sol, axis, 0, r)
        total += c if 2 * r == n else 2 * c
    return total


def spin_moments(sol):
    """
    Means and symmetrized covariances of the global spin.

    <S_x> = <S_y> = 0 and the off-diagonal covariances vanish in a parity
    eigenstate with real amplitudes, so only the diagonal is computed.

    :return: SpinMoments
    """
    n = sol.n
    g = sol.majorana_corr
    mz = sol.magnetization()

    even, odd = g[0::2, 0::2], g[1::2, 1::2]
    even_odd, odd_even = g[0::2, 1::2], g[1::2, 0::2]
    zz = -even * odd + even_odd * odd_even
    np.fill_diagonal(zz, 1 - mz ** 2)

    var_x = (n + n * _string_sum(sol, SpinAxis.X)) / 4
    var_y = (n + n * _string_sum(sol, SpinAxis.Y)) / 4
    var_z = float(np.sum(zz)) / 4
    mean = np.array([0., 0., float(np.sum(mz)) / 2])
    return SpinMoments(mean=mean, cov=np.diag([var_x, var_y, var_z]))


def rotation_tensors(moments):
    """F = 4 cov and U_xy = <S_z>, U_yz = <S_x>, U_zx = <S_y>."""
    mx, my, mz = moments.mean
    U = np.array([[0., mz, -my],
                  [-mz, 0., mx],
                  [my, -mx, 0.]])
    return 4 * moments.cov, U


def xy_rotation_metrology(n, gamma, lam, axes='xyz', sector='even'):
    """
    Tensors of the rotation protocol on the XY ground state for large chains.

    :return: MetroTensors over the rotation angles
    """
    axes = SpinAxis.parse(axes)
    sol = solve_xy(n, gamma, lam, sector)
    F, U = rotation_tensors(spin_moments(sol))
    idx = np.ix_([a.index for a in axes], [a.index for a in axes])
    return assemble(axes, F[idx], U[idx], RotatedFamily.labels,
                    diagnostics={'energy': sol.energy, 'parity': sol.parity})
