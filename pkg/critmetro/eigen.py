"""
Lowest eigenpairs of spin-chain Hamiltonians.

lanczos_lowest is a block Lanczos iteration with full reorthogonalization of
the Krylov basis, restarted from the lowest Ritz vectors until every
requested eigenpair has a residual below tol. The block size equals the
number of requested eigenpairs, which lets a single run resolve a
(near-)degenerate ground doublet. dense_lowest is the dense oracle for small
problems.

States are plain complex numpy vectors of unit norm.
"""
import dataclasses
import logging

import numpy as np
import scipy.linalg

from .models import MAX_SITES, build_hamiltonian, build_transverse_parity, order_parameter

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 2000
DEFAULT_KRYLOV_BLOCKS = 40
DEGENERACY_RTOL = 1e-8
DENSE_MAX_DIM = 2 ** 12
DEFLATION_RTOL = 1e-12


class ConvergenceError(RuntimeError):

    def __init__(self, message, best_residual):
        super().__init__(f'{message} (best residual {best_residual:.3e})')
        self.best_residual = best_residual


@dataclasses.dataclass
class EigenResult:
    """
    Lowest eigenvalues with eigenvectors as columns of `vectors`.

    `ground` is the ground state handed to consumers. It equals the first
    column unless the doublet is degenerate and a branch was selected.
    """

    energies: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    ground: np.ndarray
    residual: float
    iterations: int = 0
    degenerate: bool = False

    @property
    def E0(self):
        return float(self.energies[0])

    @property
    def E1(self):
        return float(self.energies[1]) if len(self.energies) > 1 else np.nan

    @property
    def gap(self):
        gap = self.E1 - self.E0
        if -1e-10 < gap < 0:
            return 0.
        return gap

    def is_degenerate(self, rtol=DEGENERACY_RTOL):
        return self.gap < rtol * abs(self.E0)


def normalize(v):
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError('cannot normalize the zero vector')
    return v / norm


def fix_gauge(v):
    """Multiplies by a global phase making the largest amplitude real positive."""
    k = np.argmax(np.abs(v))
    return v * (abs(v[k]) / v[k])


def _csr(op):
    return op.matrix if hasattr(op, 'matrix') else op


def _result(energies, vectors, residuals, iterations):
    ground = fix_gauge(vectors[:, 0])
    return EigenResult(energies=np.asarray(energies, dtype=float), vectors=vectors,
                       residuals=np.asarray(residuals, dtype=float), ground=ground,
                       residual=float(residuals[0]), iterations=iterations)


def lanczos_lowest(op, k=2, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=0,
                   krylov_blocks=DEFAULT_KRYLOV_BLOCKS):
    """
    The k lowest eigenpairs of a Hermitian SparseOperator.

    :param op: Hermitian SparseOperator
    :param k: number of eigenpairs, also the block size
    :param tol: residual norm required for every eigenpair
    :param max_iter: maximum number of block matrix-vector products
    :param seed: seed of the random start block and of deflation refills
    :param krylov_blocks: blocks in the Krylov basis before a restart
    :raises ValueError: for non-Hermitian input or too small dimension
    :raises ConvergenceError: if max_iter is exhausted
    :return: EigenResult
    """
    if not op.is_hermitian(atol=1e-14):
        raise ValueError('Lanczos requires a Hermitian operator')
    matrix = _csr(op)
    dim = matrix.shape[0]
    if dim < 2 * k:
        raise ValueError(f'dimension {dim} too small for {k} eigenpairs')

    rng = np.random.default_rng(seed)
    block = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    block, _ = np.linalg.qr(block)

    best = np.inf
    iterations = 0
    while iterations < max_iter:
        nblocks = min(krylov_blocks, dim // k, max_iter - iterations)
        theta, ritz, used = _block_lanczos_pass(matrix, block, max(nblocks, 1), rng)
        iterations += used

        residuals = np.linalg.norm(matrix @ ritz - ritz * theta, axis=0)
        best = min(best, residuals.max())
        logger.debug('Lanczos pass after %d block products: energies %s residuals %s',
                     iterations, theta, residuals)
        if residuals.max() < tol:
            return _result(theta, ritz, residuals, iterations)
        block, _ = np.linalg.qr(ritz)

    raise ConvergenceError(f'Lanczos did not converge in {max_iter} block products', best)


def _block_lanczos_pass(matrix, block, nblocks, rng):
    """
    One Krylov expansion from an orthonormal block; returns the lowest Ritz
    pairs of the Rayleigh quotient on the whole basis.

    A column whose new direction vanishes (an eigenvector that has already
    converged) is replaced by a random vector orthogonal to the basis, so the
    remaining columns keep expanding. The pass ends early only when every
    column has deflated.
    """
    dim, k = block.shape
    basis = [block]
    images = []

    for j in range(nblocks):
        w = matrix @ basis[j]
        images.append(w)
        if j == nblocks - 1:
            break
        scale = DEFLATION_RTOL * max(1., np.abs(basis[j].conj().T @ w).max())
        nxt, deflated = _orthonormal_extension(w, np.hstack(basis), scale, rng)
        if deflated == k:
            # the Krylov space is invariant
            break
        basis.append(nxt)

    q = np.hstack(basis[:len(images)])
    t = q.conj().T @ np.hstack(images)
    theta, s = scipy.linalg.eigh((t + t.conj().T) / 2)
    return theta[:k], q @ s[:, :k], len(images)


def _orthonormal_extension(w, q, scale, rng):
    """Gram-Schmidt of the columns of w against q and each other, with random refills."""
    dim, k = w.shape
    nxt = np.zeros((dim, k), dtype=complex)
    deflated = 0
    for j in range(k):
        v = _project_out(w[:, j], q, nxt[:, :j])
        norm = np.linalg.norm(v)
        if norm <= scale:
            deflated += 1
            v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            v = _project_out(v, q, nxt[:, :j])
            norm = np.linalg.norm(v)
        nxt[:, j] = v / norm
    return nxt, deflated


def _project_out(v, q, extra):
    for _ in range(2):
        v = v - q @ (q.conj().T @ v)
        v = v - extra @ (extra.conj().T @ v)
    return v


def dense_lowest(op, k=2):
    """Full Hermitian diagonalization; result contract as lanczos_lowest."""
    matrix = _csr(op)
    dim = matrix.shape[0]
    if dim > DENSE_MAX_DIM:
        raise ValueError(f'dimension {dim} too large for dense diagonalization')
    dense = matrix.toarray()
    energies, vectors = scipy.linalg.eigh(dense, subset_by_index=(0, k - 1))
    vectors = np.ascontiguousarray(vectors)
    residuals = np.linalg.norm(dense @ vectors - vectors * energies, axis=0)
    return _result(energies, vectors, residuals, 0)


def solve_lowest(spec, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=0, solver='lanczos',
                 max_sites=MAX_SITES):
    """Two lowest eigenpairs of a model, without any choice inside a doublet."""
    op = build_hamiltonian(spec, max_sites)
    if solver == 'dense':
        return dense_lowest(op, 2)
    if solver == 'lanczos':
        return lanczos_lowest(op, 2, tol=tol, max_iter=max_iter, seed=seed)
    raise ValueError(f'unknown solver {solver!r}')


def select_ground(result, spec, previous=None, degeneracy_rtol=DEGENERACY_RTOL,
                  max_sites=MAX_SITES, branch=None):
    """
    Ground state of a solved model with a consistent choice inside a doublet.

    With `branch` (+1 or -1) set and a first-order line crossing the model,
    the ground state is the doublet state of extremal order parameter with
    that sign: the magnetized branch, which continues smoothly through the
    first-order surface where the exact ground state tunnels between the
    two branches.

    On the transverse field plane the ground state is the even state under
    the spin flip along the field whenever the doublet holds one even and
    one odd state, degenerate or not. Elsewhere a doublet split by less
    than degeneracy_rtol * |E0| is resolved by projecting `previous` onto
    it, else by maximal order parameter (S_z, or the staggered S_z for the
    antiferromagnet).

    :param result: EigenResult with at least two eigenpairs
    :param spec: ModelSpec the result was solved for
    :param previous: state at a neighbouring parameter point, or None
    :param branch: None, +1 or -1
    :return: EigenResult
    """
    degenerate = result.is_degenerate(degeneracy_rtol)
    doublet = result.vectors[:, :2]
    ground = None

    if branch is not None and spec.first_order_line() is not None:
        ground = _extremal_order(doublet, spec, max_sites, branch)
        logger.debug('first-order line at %s: branch %+d', spec, branch)
    elif spec.transverse_field_plane():
        ground = _even_state(doublet, spec, max_sites)
    if ground is None and not degenerate:
        return result
    if ground is None and previous is not None:
        coefs = doublet.conj().T @ previous
        if np.linalg.norm(coefs) > 1e-12:
            ground = normalize(doublet @ coefs)
            logger.debug('degenerate doublet at %s: projected previous state (weight %.3g)',
                         spec, np.linalg.norm(coefs))
    if ground is None:
        ground = _extremal_order(doublet, spec, max_sites, 1)
        logger.debug('degenerate doublet at %s: picked branch of maximal order parameter', spec)

    ground = fix_gauge(ground)
    h_ground = build_hamiltonian(spec, max_sites).apply(ground)
    energy = np.vdot(ground, h_ground).real
    residual = float(np.linalg.norm(h_ground - energy * ground))
    return dataclasses.replace(result, ground=ground, residual=residual, degenerate=degenerate)


def _even_state(doublet, spec, max_sites):
    """+1 parity state of a doublet split by the transverse parity, else None."""
    parity = build_transverse_parity(spec, max_sites)
    m = doublet.conj().T @ parity.apply(doublet)
    w, u = np.linalg.eigh((m + m.conj().T) / 2)
    if w[-1] - w[0] < 1:
        return None
    logger.debug('doublet at %s: picked the even state (parities %.3g, %.3g)', spec, w[0], w[1])
    return normalize(doublet @ u[:, -1])


def _extremal_order(doublet, spec, max_sites, sign):
    m = doublet.conj().T @ order_parameter(spec, max_sites).apply(doublet)
    _, u = np.linalg.eigh(sign * (m + m.conj().T) / 2)
    return normalize(doublet @ u[:, -1])


def ground_state_tracked(spec, previous=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                         seed=0, degeneracy_rtol=DEGENERACY_RTOL, solver='lanczos',
                         max_sites=MAX_SITES, branch=None):
    """
    Ground state of a model with a consistent choice inside a degenerate doublet.

    :param spec: ModelSpec
    :param previous: state at a neighbouring parameter point, or None
    :param solver: 'lanczos' or 'dense'
    :param branch: magnetized branch to follow across a first-order line, or None
    :return: EigenResult, see select_ground
    """
    result = solve_lowest(spec, tol=tol, max_iter=max_iter, seed=seed, solver=solver,
                          max_sites=max_sites)
    return select_ground(result, spec, previous, degeneracy_rtol, max_sites, branch)
