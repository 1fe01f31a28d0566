"""
Multiparameter estimation tensors of pure states.

For a family psi(lambda) with quantum geometric tensor
Q_mn = <d_m psi|(1 - |psi><psi|)|d_n psi>, the quantum Fisher information
matrix is F = 4 Re Q and the mean Uhlmann curvature is U = 2 Im Q (the Berry
curvature). The quantumness R = max |eig(2i F^-1 U)| lies in [0, 1]; R = 0
means the parameters are asymptotically compatible.

Three estimators are provided:

- fidelity ladders and Bargmann loops (qfim_fidelity, muc_bargmann), which
  only need ground states at nearby parameter points,
- covariances of the global spin for rotated states (spin_covariance_qfim),
- finite difference derivatives of gauge-fixed states (qgt_finite_difference).
"""
import dataclasses
import itertools
import logging

import numpy as np

from .eigen import ground_state_tracked
from .families import GroundStateFamily, StateFamily, RotatedFamily, family_for, unit
from .models import ModelKind, ModelSpec, build_global_spin
from .operators import AXES, SpinAxis
from .stencils import ParameterStencil

logger = logging.getLogger(__name__)

DEFAULT_DELTA0 = 1e-3
DEFAULT_LADDER = 6
DEFAULT_AREAS = (1e-6, 4e-6, 1.6e-5)
FIDELITY_CAP = 1e-2
FIT_RTOL = 1e-2
NOISE_FLOOR = 1e-13
MAX_SHRINK = 30
RCOND = 1e-10
R_TOLERANCE = 1e-3
METHODS = ('fidelity_bargmann', 'exact_rotation', 'finite_difference')


class FitResidualError(ValueError):

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclasses.dataclass
class MetroTensors:
    """
    QFIM F, mean Uhlmann curvature U and quantumness values at one point.

    R_pairs maps an axis pair (a, b) with a < b to R of the two-parameter
    sub-model. Undefined values are nan and explained in `flags`.
    """

    axes: tuple
    labels: tuple
    F: np.ndarray
    U: np.ndarray
    R_pairs: dict
    R_full: float
    flags: dict = dataclasses.field(default_factory=dict)
    diagnostics: dict = dataclasses.field(default_factory=dict)

    def F_entry(self, a, b):
        return self.F[self.axes.index(SpinAxis(a)), self.axes.index(SpinAxis(b))]

    def U_entry(self, a, b):
        return self.U[self.axes.index(SpinAxis(a)), self.axes.index(SpinAxis(b))]

    def R(self, a, b):
        key = tuple(sorted((SpinAxis(a), SpinAxis(b)), key=lambda x: x.index))
        return self.R_pairs[key]

    def columns(self):
        """Flat name -> value mapping in a fixed order."""
        cols = {}
        for i, a in enumerate(self.axes):
            for j, b in enumerate(self.axes):
                if j >= i:
                    cols[f'F_{a.value}{b.value}'] = float(self.F[i, j])
        for i, j in itertools.combinations(range(len(self.axes)), 2):
            cols[f'U_{self.axes[i].value}{self.axes[j].value}'] = float(self.U[i, j])
        for (a, b), r in self.R_pairs.items():
            cols[f'R_{a.value}{b.value}'] = float(r)
        cols['R_full'] = float(self.R_full)
        return cols


@dataclasses.dataclass(frozen=True)
class LoopSpec:
    """
    Rectangle in the (mu, nu) plane of a family's parameters, traversed
    counter-clockwise and centred on `center`.
    """

    plane: tuple
    side_mu: float
    side_nu: float
    center: tuple = (0., 0., 0.)

    def __post_init__(self):
        mu, nu = (SpinAxis(a) for a in self.plane)
        if mu == nu:
            raise ValueError('loop plane needs two distinct axes')
        if self.area <= 0:
            raise ValueError('loop area must be positive')
        object.__setattr__(self, 'plane', (mu, nu))

    @property
    def area(self):
        return self.side_mu * self.side_nu

    def vertices(self):
        mu, nu = self.plane
        center = np.asarray(self.center, dtype=float)
        corners = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
        return [center + a * self.side_mu * unit(mu) + b * self.side_nu * unit(nu)
                for a, b in corners]


def _check_pair(a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f'dimension mismatch: {a.shape} vs {b.shape}')
    return a, b


def fidelity(a, b):
    """Uhlmann fidelity of two pure states, |<a|b>|."""
    a, b = _check_pair(a, b)
    return min(1., float(abs(np.vdot(a, b))))


def bargmann_phase(states, closed=True):
    """
    arg of the product of consecutive overlaps <psi_i|psi_i+1>, in (-pi, pi].

    With closed=True the last state is connected back to the first; the
    result is then independent of the phase of every state.
    """
    if len(states) < 3:
        raise ValueError('a Bargmann loop needs at least three states')
    pairs = list(zip(states[:-1], states[1:]))
    if closed:
        pairs.append((states[-1], states[0]))
    product = 1. + 0j
    for a, b in pairs:
        a, b = _check_pair(a, b)
        overlap = np.vdot(a, b)
        if abs(overlap) < 1e-12:
            raise ValueError('vanishing overlap: Bargmann phase undefined')
        product *= overlap / abs(overlap)
    return float(np.angle(product))


def _as_family(target, solver_kwargs):
    if isinstance(target, StateFamily):
        return target
    if isinstance(target, ModelSpec):
        return family_for(target, **solver_kwargs)
    raise ValueError(f'expected a ModelSpec or StateFamily, got {type(target).__name__}')


def ladder_offsets(ladder, scheme):
    if ladder < 4:
        raise ValueError('fidelity ladders need K >= 4 steps')
    if scheme == 'forward':
        return np.arange(0, ladder + 1)
    if scheme == 'backward':
        return np.arange(-ladder, 1)
    half = ladder // 2
    return np.arange(-half, ladder - half + 1)


def fidelity_curvature(family, direction, delta0=DEFAULT_DELTA0, ladder=DEFAULT_LADDER,
                       fit_rtol=FIT_RTOL):
    """
    Coefficient c of 1 - fidelity = c t^2 + d t^3 along base + t * direction.

    The step shrinks by half until 1 - fidelity stays below FIDELITY_CAP on
    the whole ladder, and next to a first-order line until the one-sided
    ladder stays well clear of it. c comes from a least-squares fit through
    the origin; the cubic term absorbs the asymmetry of one-sided ladders.

    :return: c, diagnostics dict
    """
    direction = np.asarray(direction, dtype=float)
    delta = delta0
    for _ in range(MAX_SHRINK):
        delta, scheme = family.ladder_step(direction, delta, ladder - ladder // 2, ladder)
        t = ladder_offsets(ladder, scheme) * delta
        states = family.path(direction, t)
        center = states[list(t).index(0.)]
        loss = np.array([1. - fidelity(center, s) for s in states])
        if loss.max() <= FIDELITY_CAP:
            break
        logger.info('fidelity ladder too coarse (max loss %.3g), halving step %.3g',
                    loss.max(), delta)
        delta *= 0.5
    else:
        raise FitResidualError('fidelity ladder did not reach the quadratic regime',
                               {'delta0': delta})

    diagnostics = {'delta0': delta, 'scheme': scheme, 'points': len(t),
                   'max_loss': float(loss.max())}
    if loss.max() < NOISE_FLOOR:
        diagnostics.update(curvature=0., rss=0., relative_residual=0.)
        return 0., diagnostics

    u = t / delta
    design = np.column_stack([u ** 2, u ** 3])
    coefs, *_ = np.linalg.lstsq(design, loss, rcond=None)
    residual = loss - design @ coefs
    rss = float(np.sum(residual ** 2))
    relative = float(np.sqrt(rss / np.sum(loss ** 2)))
    curvature = float(coefs[0]) / delta ** 2
    diagnostics.update(curvature=curvature, cubic=float(coefs[1]) / delta ** 3, rss=rss,
                       relative_residual=relative)
    if relative > fit_rtol:
        raise FitResidualError(
            f'fidelity ladder not quadratic (relative residual {relative:.3g}); '
            f'a phase boundary may lie inside the ladder', diagnostics)
    return curvature, diagnostics


def qfim_fidelity(target, axes, delta0=DEFAULT_DELTA0, ladder=DEFAULT_LADDER,
                  fit_rtol=FIT_RTOL, strict=True, **solver_kwargs):
    """
    QFIM from the curvature of the fidelity, F_mm = 8 c_m.

    Off-diagonal entries use one extra ladder along e_m + e_n:
    F_mn = (8 c_mn - F_mm - F_nn) / 2.

    :param target: ModelSpec or StateFamily
    :param axes: parameter axes, e.g. "xz"
    :param strict: if False, a ladder failing its fit leaves nan in the
        entries it determines instead of raising FitResidualError
    :return: F (p x p, in x < y < z order), diagnostics dict keyed by direction name
    """
    family = _as_family(target, solver_kwargs)
    axes = SpinAxis.parse(axes)
    p = len(axes)
    F = np.zeros((p, p))
    diagnostics = {}

    def curvature(name, direction):
        try:
            c, diagnostics[name] = fidelity_curvature(family, direction, delta0, ladder, fit_rtol)
        except FitResidualError as err:
            if strict:
                raise
            logger.warning('fidelity ladder %s failed: %s', name, err)
            diagnostics[name] = dict(err.diagnostics, error=str(err))
            return np.nan
        return c

    for i, a in enumerate(axes):
        F[i, i] = 8 * curvature(a.value, unit(a))
    for i, j in itertools.combinations(range(p), 2):
        a, b = axes[i], axes[j]
        c = curvature(a.value + b.value, unit(a, b))
        F[i, j] = F[j, i] = (8 * c - F[i, i] - F[j, j]) / 2
    return F, diagnostics


def _loop_center(family, plane, side):
    """Moves a loop off a first-order line it would straddle."""
    line = family.first_order_line()
    center = np.zeros(3)
    if line is None:
        return center
    axis, distance = line
    if axis in plane and abs(distance) < side:
        sign = 1. if distance >= 0 else -1.
        center[axis.index] = sign * side - distance
    return center


def muc_bargmann(target, plane, areas=DEFAULT_AREAS, fit_rtol=FIT_RTOL, **solver_kwargs):
    """
    Berry curvature U_mn as the slope of the Bargmann phase of small square
    loops against their area (least squares through the origin).

    Loops that would straddle a first-order line are shifted to the side of
    the base point.

    :param target: ModelSpec or StateFamily
    :param plane: axis pair (mu, nu)
    :param areas: at least three distinct loop areas spanning a factor of 4
    :return: U_mn, diagnostics dict
    """
    family = _as_family(target, solver_kwargs)
    mu, nu = (SpinAxis(a) for a in plane)
    areas = np.asarray(sorted(areas), dtype=float)
    if len(set(areas)) < 3 or areas[-1] < 4 * areas[0]:
        raise ValueError('need three distinct loop areas spanning a factor of 4')

    base = family.state(np.zeros(3))
    phases = []
    for area in areas:
        side = np.sqrt(area)
        loop = LoopSpec((mu, nu), side, side, tuple(_loop_center(family, (mu, nu), side)))
        states = [family.state(v, base) for v in loop.vertices()]
        phases.append(bargmann_phase(states))
    phases = np.array(phases)

    slope = float(np.dot(areas, phases) / np.dot(areas, areas))
    residual = phases - slope * areas
    rss = float(np.sum(residual ** 2))
    scale = float(np.sum(phases ** 2))
    diagnostics = {'areas': areas.tolist(), 'phases': phases.tolist(), 'rss': rss}
    if scale > NOISE_FLOOR ** 2:
        relative = float(np.sqrt(rss / scale))
        diagnostics['relative_residual'] = relative
        if relative > fit_rtol:
            raise FitResidualError(f'Bargmann phase not linear in the loop area '
                                   f'(relative residual {relative:.3g})', diagnostics)
    return slope, diagnostics


def qgt_finite_difference(target, axes, step=1e-3, acc=4, **solver_kwargs):
    """
    F and U from finite difference derivatives of states in the parallel
    transport gauge, Q_mn = <d_m psi|d_n psi> - <d_m psi|psi><psi|d_n psi>.

    :return: F, U (p x p)
    """
    family = _as_family(target, solver_kwargs)
    axes = SpinAxis.parse(axes)
    center = family.state(np.zeros(3))
    central = ParameterStencil(1, 1., acc).reach
    one_sided = ParameterStencil(1, 1., acc, 'forward').reach
    derivatives = []
    for a in axes:
        direction = unit(a)
        h, scheme = family.ladder_step(direction, step, central, one_sided)
        stencil = ParameterStencil(1, h, acc, scheme)
        states = family.path(direction, stencil.displacements())
        gauged = []
        for s in states:
            overlap = np.vdot(center, s)
            gauged.append(s * (abs(overlap) / overlap))
        derivatives.append(stencil.apply(gauged))
    d = np.column_stack(derivatives)
    berry = d.conj().T @ center
    q = d.conj().T @ d - np.outer(berry, berry.conj())
    F = 4 * q.real
    U = 2 * q.imag
    return (F + F.T) / 2, (U - U.T) / 2


def spin_covariance_qfim(ground, n):
    """
    Exact tensors of the rotation protocol at phi = 0:
    F_mn = 4 (<{S_m, S_n}>/2 - <S_m><S_n>) and U_mn = -i <[S_m, S_n]>.

    :return: F, U as 3 x 3 arrays in x, y, z order
    """
    ground = np.asarray(ground, dtype=complex)
    if ground.shape != (2 ** n,):
        raise ValueError(f'state of length {ground.shape[0]} is not a {n}-spin state')
    images = [build_global_spin(n, a, max_sites=max(n, 3)).apply(ground) for a in AXES]
    mean = np.array([np.vdot(ground, s).real for s in images])
    moments = np.array([[np.vdot(s, t) for t in images] for s in images])
    F = 4 * (moments.real - np.outer(mean, mean))
    U = 2 * moments.imag
    return (F + F.T) / 2, (U - U.T) / 2


def regularity(F, rcond=RCOND):
    """'ok', 'regularized' (pseudo-inverse needed) or 'undefined' (F vanishes)."""
    w = np.linalg.eigvalsh(np.atleast_2d(F))
    top = np.max(np.abs(w))
    if top <= NOISE_FLOOR:
        return 'undefined'
    if w.min() <= rcond * top:
        return 'regularized'
    return 'ok'


def quantumness(F, U, rcond=RCOND):
    """
    R = max |eig(2i F^-1 U)|, with a pseudo-inverse when F is singular.

    Returns nan when F vanishes. Values up to 1 + R_TOLERANCE are clamped
    to 1, larger ones raise ValueError.
    """
    F, U = np.atleast_2d(F), np.atleast_2d(U)
    if F.shape != U.shape:
        raise ValueError(f'F and U shapes differ: {F.shape} vs {U.shape}')
    status = regularity(F, rcond)
    if status == 'undefined':
        return np.nan
    if status == 'ok':
        finv = np.linalg.inv(F)
    else:
        finv = np.linalg.pinv(F, rcond=rcond, hermitian=True)
    r = float(np.max(np.abs(np.linalg.eigvals(2j * finv @ U))))
    if r > 1 + R_TOLERANCE:
        raise ValueError(f'quantumness {r:.6g} exceeds 1')
    if r > 1:
        logger.info('clamping quantumness %.12g to 1', r)
        r = 1.
    return r


def quantumness_det(F, U):
    """Two-parameter form sqrt(det 2U / det F)."""
    F, U = np.asarray(F), np.asarray(U)
    if F.shape != (2, 2):
        raise ValueError('determinant form holds for two parameters only')
    det_f = np.linalg.det(F)
    if det_f <= 0:
        return np.nan
    return float(np.sqrt(max(np.linalg.det(2 * U), 0.) / det_f))


def assemble(axes, F, U, labels, flags=None, diagnostics=None):
    """MetroTensors with all pairwise and full quantumness values."""
    axes = tuple(axes)
    flags = dict(flags or {})
    r_pairs = {}
    for i, j in itertools.combinations(range(len(axes)), 2):
        key = (axes[i], axes[j])
        name = axes[i].value + axes[j].value
        sub = np.ix_([i, j], [i, j])
        r_pairs[key] = _safe_quantumness(F[sub], U[sub], name, flags)
        if np.isfinite(r_pairs[key]):
            det_f, det_u = np.linalg.det(F[sub]), np.linalg.det(2 * U[sub])
            if det_f < det_u - 1e-9 * max(1., abs(det_f)):
                logger.warning('det F < det 2U for pair %s: %.6g < %.6g', name, det_f, det_u)
                flags[name] = 'det_inequality'
    if len(axes) > 1:
        r_full = _safe_quantumness(F, U, 'full', flags)
    else:
        r_full = 0.
    return MetroTensors(axes=axes, labels=tuple(labels[a] for a in axes), F=F, U=U,
                        R_pairs=r_pairs, R_full=r_full, flags=flags,
                        diagnostics=dict(diagnostics or {}))


def _safe_quantumness(F, U, name, flags):
    if not (np.all(np.isfinite(F)) and np.all(np.isfinite(U))):
        flags[name] = 'undefined'
        return np.nan
    status = regularity(F)
    if status != 'ok':
        flags[name] = status
        if status == 'regularized':
            logger.info('pseudo-inverse used for quantumness of %s', name)
    try:
        return quantumness(F, U)
    except ValueError as err:
        logger.warning('quantumness of %s undefined: %s', name, err)
        flags[name] = 'bound'
        return np.nan


def _tensors(family, axes, method, delta0, ladder, areas, fd_step, fd_acc):
    """F, U, flags and diagnostics of a family along the given axes."""
    if method == 'finite_difference':
        F, U = qgt_finite_difference(family, axes, fd_step, fd_acc)
        return F, U, {}, {}

    p = len(axes)
    F, diagnostics = qfim_fidelity(family, axes, delta0, ladder, strict=False)
    flags = {name: 'fit' for name, d in diagnostics.items() if 'error' in d}
    U = np.zeros((p, p))
    for i, j in itertools.combinations(range(p), 2):
        name = axes[i].value + axes[j].value
        try:
            u, diagnostics['loop_' + name] = muc_bargmann(family, (axes[i], axes[j]), areas)
        except ValueError as err:
            logger.warning('curvature U_%s undefined: %s', name, err)
            flags[name] = 'loop'
            u = np.nan
        U[i, j], U[j, i] = u, -u
    return F, U, flags, diagnostics


def _branch_regime(family, axes, delta0):
    """
    Whether the base point sits on a first-order surface whose doublet a
    ladder step across it cannot follow smoothly.
    """
    if not isinstance(family, GroundStateFamily):
        return False
    line = family.first_order_line()
    if line is None or line[1] != 0 or line[0] not in axes:
        return False
    return family.crossing_unresolved(delta0)


def metro_point(spec, axes='xyz', method='fidelity_bargmann', delta0=DEFAULT_DELTA0,
                ladder=DEFAULT_LADDER, areas=DEFAULT_AREAS, fd_step=1e-3, fd_acc=4,
                **solver_kwargs):
    """
    F, U and all quantumness values of a model at one parameter point.

    On a first-order surface the ground state of a finite chain is a
    superposition of the two magnetized branches, and a ladder step across
    the surface that splits them by more than their tunnelling gap jumps to
    one of them. There F and U are those of the branch of positive order
    parameter, while the quantumness of every pair of axes lying inside the
    surface is recomputed from the exact ground states on it; such pairs are
    flagged 'surface' and their tensors are reported in diagnostics['surface'].

    :param spec: ModelSpec. Ising models are displaced through their fields,
        the XY chain through rotations of its ground state.
    :param axes: parameter axes
    :param method: 'fidelity_bargmann', 'exact_rotation' (XY chain only)
        or 'finite_difference'
    :return: MetroTensors
    """
    if method not in METHODS:
        raise ValueError(f'unknown method {method!r}')
    axes = SpinAxis.parse(axes)

    if method == 'exact_rotation':
        if spec.kind is not ModelKind.XY_CHAIN:
            raise ValueError('exact_rotation applies to the XY rotation protocol only')
        ground = ground_state_tracked(spec, **solver_kwargs).ground
        F3, U3 = spin_covariance_qfim(ground, spec.n)
        idx = np.ix_([a.index for a in axes], [a.index for a in axes])
        return assemble(axes, F3[idx], U3[idx], RotatedFamily.labels)

    family = family_for(spec, **solver_kwargs)
    options = (method, delta0, ladder, areas, fd_step, fd_acc)
    if not _branch_regime(family, axes, delta0):
        F, U, flags, diagnostics = _tensors(family, axes, *options)
        return assemble(axes, F, U, family.labels, flags, diagnostics)

    line_axis = family.first_order_line()[0]
    logger.info('%s lies on its first-order surface, following the branch along %s',
                spec, line_axis.value)
    F, U, flags, diagnostics = _tensors(family.on_branch(1), axes, *options)
    tensors = assemble(axes, F, U, family.labels, flags, diagnostics)

    inside = tuple(a for a in axes if a is not line_axis)
    if len(inside) < 2:
        return tensors
    F_s, U_s, flags_s, diagnostics_s = _tensors(family, inside, *options)
    surface = assemble(inside, F_s, U_s, family.labels, flags_s)
    for key, r in surface.R_pairs.items():
        tensors.R_pairs[key] = r
        tensors.flags[key[0].value + key[1].value] = 'surface'
    tensors.diagnostics['surface'] = dict(diagnostics_s, axes=[a.value for a in inside],
                                          F=F_s.tolist(), U=U_s.tolist(),
                                          flags=surface.flags)
    return tensors
