"""
Families of pure states depending on up to three real parameters.

A family maps a displacement vector (one component per SpinAxis) away from
its base point to a normalized state. GroundStateFamily displaces the
fields (h_x, h_y, h_z) of an Ising model, RotatedFamily rotates a fixed reference state
by exp(-i phi.S), and BlochFamily is the single spin anti-aligned with the
Bloch direction (theta, phi), used as an analytic reference.
"""
import logging

import numpy as np
from scipy.sparse.linalg import expm_multiply

from .eigen import (DEFAULT_TOL, DEFAULT_MAX_ITER, DEGENERACY_RTOL, ground_state_tracked,
                    select_ground, solve_lowest)
from .models import MAX_SITES, build_global_spin
from .operators import AXES, SpinAxis

logger = logging.getLogger(__name__)

REACH_FRACTION = 0.1
MIN_STEP = 1e-12
BRANCH_GAP_RATIO = 2.


def unit(*axes):
    """Direction vector with unit components along the given axes."""
    d = np.zeros(3)
    for axis in axes:
        d[SpinAxis(axis).index] = 1.
    return d


class StateFamily(object):
    """ Base class of all state families """

    labels = {axis: axis.value for axis in AXES}

    def state(self, shift, previous=None):
        raise NotImplementedError

    def first_order_line(self):
        """(axis, signed distance of the base point from the line), or None."""
        return None

    def crossing(self, direction):
        """Displacement t at which base + t * direction meets the first-order line, or None."""
        line = self.first_order_line()
        if line is None:
            return None
        axis, distance = line
        d = direction[axis.index]
        if d == 0:
            return None
        return -distance / d

    def scheme(self, direction, reach):
        """
        Finite difference scheme for a ladder of half-width `reach` along
        `direction`: one-sided away from a first-order line the ladder would
        otherwise touch, central everywhere else.
        """
        t = self.crossing(direction)
        if t is None or abs(t) > reach:
            return 'center'
        if t < 0 or (t == 0 and direction[self.first_order_line()[0].index] > 0):
            return 'forward'
        return 'backward'

    def ladder_step(self, direction, step, half_width, full_width):
        """
        Step and scheme of a ladder along `direction`.

        half_width and full_width are the reaches of the central and of the
        one-sided ladder in units of the step. Next to a first-order line the
        one-sided ladder is shrunk until it covers at most REACH_FRACTION of
        the distance to the line.
        """
        direction = np.asarray(direction, dtype=float)
        scheme = self.scheme(direction, half_width * step)
        if scheme == 'center':
            return step, scheme
        t = self.crossing(direction)
        if t != 0:
            step = max(min(step, REACH_FRACTION * abs(t) / full_width), MIN_STEP)
        return step, scheme

    def path(self, direction, displacements):
        """
        States at base + t * direction for every t in displacements.

        States are computed outward from t = 0 so that each one can be
        matched with its neighbour closer to the base point.
        """
        direction = np.asarray(direction, dtype=float)
        center = self.state(np.zeros(3))
        states = {0.: center}
        for side in (1, -1):
            previous = center
            for t in sorted((t for t in displacements if side * t > 0), key=abs):
                previous = self.state(t * direction, previous)
                states[t] = previous
        return [states[t] for t in displacements]


class GroundStateFamily(StateFamily):
    """
    Ground states of an Ising model as functions of the fields.

    Spectra are cached by displacement, so ladders and loops sharing points
    solve each Hamiltonian once. The choice inside a doublet is made on
    every call from that call's neighbour, see select_ground.

    With branch=+1 or -1 and a first-order line crossing the model, every
    point takes the magnetized branch of that sign instead of the ground
    state, see select_ground.
    """

    labels = {SpinAxis.X: 'hx', SpinAxis.Y: 'hy', SpinAxis.Z: 'hz'}

    def __init__(self, spec, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=0,
                 degeneracy_rtol=DEGENERACY_RTOL, solver='lanczos', max_sites=MAX_SITES,
                 branch=None):
        if not spec.is_ising:
            raise ValueError('ground-state families are defined for the Ising models')
        if branch not in (None, 1, -1):
            raise ValueError(f'branch must be None, +1 or -1, got {branch!r}')
        self.spec = spec
        self.n = spec.n
        self.branch = branch
        self.degeneracy_rtol = degeneracy_rtol
        self.max_sites = max_sites
        self._solver_kwargs = dict(tol=tol, max_iter=max_iter, seed=seed, solver=solver,
                                   max_sites=max_sites)
        self._cache = {}
        self.degenerate = False

    def eigen(self, shift=(0., 0., 0.)):
        """Two lowest eigenpairs at base + shift."""
        key = tuple(float(s) for s in shift)
        if key not in self._cache:
            self._cache[key] = solve_lowest(self.spec.shifted(key), **self._solver_kwargs)
        return self._cache[key]

    def tracked(self, shift=(0., 0., 0.), previous=None):
        result = select_ground(self.eigen(shift), self.spec.shifted(shift), previous,
                               self.degeneracy_rtol, self.max_sites, self.branch)
        self.degenerate |= result.degenerate
        return result

    def state(self, shift, previous=None):
        return self.tracked(shift, previous).ground

    def first_order_line(self):
        line = self.spec.first_order_line()
        if line is None:
            return None
        axis, value = line
        return axis, self.spec.field[axis.index] - value

    def crossing_unresolved(self, step):
        """
        Whether the base point lies on its first-order surface and a ladder
        step off the surface already splits the doublet by more than
        BRANCH_GAP_RATIO times its gap on the surface, so that ladders see a
        jump between branches instead of a smooth avoided crossing.
        """
        if not self.spec.on_first_order_surface():
            return False
        axis = self.spec.first_order_line()[0]
        gap = self.eigen().gap
        return self.eigen(step * unit(axis)).gap > BRANCH_GAP_RATIO * gap

    def on_branch(self, branch):
        """Same model following one magnetized branch; shares the spectra."""
        other = GroundStateFamily(self.spec, degeneracy_rtol=self.degeneracy_rtol,
                                  branch=branch, **self._solver_kwargs)
        other._cache = self._cache
        return other


class RotatedFamily(StateFamily):
    """ psi(phi) = exp(-i (phi_x S_x + phi_y S_y + phi_z S_z)) psi_0 """

    labels = {SpinAxis.X: 'phix', SpinAxis.Y: 'phiy', SpinAxis.Z: 'phiz'}

    def __init__(self, reference, n, max_sites=MAX_SITES):
        reference = np.asarray(reference, dtype=complex)
        if reference.shape != (2 ** n,):
            raise ValueError(f'reference state of length {reference.shape[0]} '
                             f'does not match {n} spins')
        self.reference = reference
        self.n = n
        self.spins = [build_global_spin(n, axis, max_sites) for axis in AXES]

    def state(self, shift, previous=None):
        shift = np.asarray(shift, dtype=float)
        if not np.any(shift):
            return self.reference
        generator = sum(phi * s for phi, s in zip(shift, self.spins) if phi != 0)
        return expm_multiply(-1j * generator.matrix, self.reference)


class BlochFamily(StateFamily):
    """ Single spin anti-aligned with (sin t cos p, sin t sin p, cos t); x is t, y is p. """

    labels = {SpinAxis.X: 'theta', SpinAxis.Y: 'phi', SpinAxis.Z: 'unused'}

    def __init__(self, theta, phi):
        self.theta = theta
        self.phi = phi

    def state(self, shift, previous=None):
        t = self.theta + shift[0]
        p = self.phi + shift[1]
        return np.array([np.sin(t / 2), -np.exp(1j * p) * np.cos(t / 2)])


def family_for(spec, **solver_kwargs):
    """Natural family of a model: field shifts for Ising chains, rotations of the XY ground state."""
    if spec.is_ising:
        return GroundStateFamily(spec, **solver_kwargs)
    ground = ground_state_tracked(spec, **solver_kwargs).ground
    return RotatedFamily(ground, spec.n, solver_kwargs.get('max_sites', MAX_SITES))
