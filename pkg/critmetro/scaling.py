"""
Finite-size scaling: least-squares fits in linearized coordinates, location
of QFIM maxima, widths of quantumness drops and gap scaling.
"""
import dataclasses
import enum
import logging
import math

import numpy as np

from .eigen import solve_lowest
from .metrology import DEFAULT_DELTA0, metro_point, qfim_fidelity
from .models import MAX_SITES, build_global_spin
from .operators import SpinAxis

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2
GAP_FLOOR = 1e-12
CROSSING_RESOLUTION = 1e-2


class FitModel(str, enum.Enum):
    POWER_LAW = 'power'
    EXPONENTIAL = 'exponential'
    LINEAR = 'linear'
    PARABOLA = 'parabola'


@dataclasses.dataclass
class FitResult:
    """
    Least-squares fit. rss and r2 refer to the coordinates the fit was done
    in: (log10 x, log10 y) for power laws, (x, ln y) for exponentials.
    """

    model: FitModel
    coefficients: dict
    rss: float
    r2: float
    npoints: int

    def __getitem__(self, name):
        return self.coefficients[name]

    @property
    def rss_natural(self):
        """rss expressed in ln y units, comparable across models."""
        if self.model is FitModel.POWER_LAW:
            return self.rss * math.log(10) ** 2
        return self.rss

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        c = self.coefficients
        if self.model is FitModel.POWER_LAW:
            return 10 ** c['a'] * x ** c['m']
        if self.model is FitModel.EXPONENTIAL:
            return c['A'] * np.exp(c['rate'] * x)
        if self.model is FitModel.LINEAR:
            return c['intercept'] + c['slope'] * x
        return c['c0'] + c['c1'] * x + c['c2'] * x ** 2

    def as_dict(self):
        return {'model': self.model.value, 'coefficients': dict(self.coefficients),
                'rss': self.rss, 'r2': self.r2, 'npoints': self.npoints}


@dataclasses.dataclass
class ScalingReport:
    quantity: str
    sizes: list
    values: list
    best: FitResult
    alt: FitResult
    preferred: str
    score: float
    extras: dict = dataclasses.field(default_factory=dict)

    @property
    def power(self):
        return self.best if self.best.model is FitModel.POWER_LAW else self.alt

    @property
    def exponential(self):
        return self.best if self.best.model is FitModel.EXPONENTIAL else self.alt

    def as_dict(self):
        return {'quantity': self.quantity, 'sizes': list(self.sizes),
                'values': [float(v) for v in self.values],
                'best': self.best.as_dict(), 'alt': self.alt.as_dict(),
                'preferred': self.preferred, 'score': self.score,
                'extras': self.extras}


def _prepare(x, y, positive_x=False, positive_y=False, minimum=3):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError('x and y must be 1D arrays of equal length')
    if len(x) < minimum:
        raise ValueError(f'need at least {minimum} points, got {len(x)}')
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError('data must be finite')
    if positive_x and np.any(x <= 0):
        raise ValueError('x values must be positive')
    if positive_y and np.any(y <= 0):
        raise ValueError('y values must be positive')
    return x, y


def _polyfit(x, y, deg):
    coefs = np.polyfit(x, y, deg)
    residual = y - np.polyval(coefs, x)
    rss = float(np.sum(residual ** 2))
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst > 0:
        r2 = 1 - rss / sst
    else:
        r2 = 1. if rss <= 1e-24 else -np.inf
    return coefs, rss, r2


def fit_linear(x, y):
    x, y = _prepare(x, y)
    (slope, intercept), rss, r2 = _polyfit(x, y, 1)
    return FitResult(FitModel.LINEAR, {'slope': float(slope), 'intercept': float(intercept)},
                     rss, r2, len(x))


def fit_parabola(x, y):
    x, y = _prepare(x, y)
    (c2, c1, c0), rss, r2 = _polyfit(x, y, 2)
    return FitResult(FitModel.PARABOLA, {'c0': float(c0), 'c1': float(c1), 'c2': float(c2)},
                     rss, r2, len(x))


def fit_power_law(x, y):
    """y = 10^a x^m, fitted as a line in (log10 x, log10 y)."""
    x, y = _prepare(x, y, positive_x=True, positive_y=True)
    (m, a), rss, r2 = _polyfit(np.log10(x), np.log10(y), 1)
    return FitResult(FitModel.POWER_LAW, {'m': float(m), 'a': float(a)}, rss, r2, len(x))


def fit_exponential(x, y):
    """y = A exp(rate x), fitted as a line in (x, ln y)."""
    x, y = _prepare(x, y, positive_y=True)
    (rate, intercept), rss, r2 = _polyfit(x, np.log(y), 1)
    return FitResult(FitModel.EXPONENTIAL, {'A': float(np.exp(intercept)), 'rate': float(rate)},
                     rss, r2, len(x))


def scaling_report(quantity, sizes, values, extras=None):
    """Power-law and exponential fits of values(sizes); the smaller rss in ln units wins."""
    sizes = [int(n) for n in sizes]
    if any(b <= a for a, b in zip(sizes[:-1], sizes[1:])):
        raise ValueError('sizes must be strictly increasing')
    power = fit_power_law(sizes, values)
    expo = fit_exponential(sizes, values)
    if expo.rss_natural < power.rss_natural:
        best, alt, preferred = expo, power, 'exponential'
    else:
        best, alt, preferred = power, expo, 'power'
    score = alt.rss_natural / best.rss_natural if best.rss_natural > 0 else np.inf
    return ScalingReport(quantity=quantity, sizes=sizes, values=[float(v) for v in values],
                         best=best, alt=alt, preferred=preferred, score=float(score),
                         extras=dict(extras or {}))


def golden_section_max(f, a, b, tol=1e-3):
    """
    Golden-section search for the maximum of a unimodal f on [a, b].

    :return: (x, f(x)) with x within tol of the maximizer
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = (a + b) / 2
        return x, f(x)

    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(steps - 1):
        if yc > yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    if yc > yd:
        return c, yc
    return d, yd


@dataclasses.dataclass
class MaximumResult:
    x: float
    value: float
    grid: np.ndarray
    profile: np.ndarray
    on_boundary: bool = False


def locate_maximum(func, grid, tol=1e-3):
    """
    Maximum of func over a grid, refined by golden-section search between
    the neighbours of the best grid point. A maximum on the grid boundary is
    reported but not refined.
    """
    grid = np.asarray(sorted(grid), dtype=float)
    if len(grid) < 5:
        raise ValueError('need at least 5 grid points')
    profile = np.array([func(x) for x in grid])
    i = int(np.argmax(profile))
    if i in (0, len(grid) - 1):
        logger.warning('maximum at the grid boundary %.6g, not refined', grid[i])
        return MaximumResult(grid[i], profile[i], grid, profile, on_boundary=True)
    x, value = golden_section_max(func, grid[i - 1], grid[i + 1], tol)
    if value < profile[i]:
        x, value = grid[i], profile[i]
    return MaximumResult(float(x), float(value), grid, profile)


def locate_critical_point(spec, label, grid, n=None, axis='x', xtol=1e-3, **kwargs):
    """
    Parameter value maximizing the QFIM diagonal F_aa when `label` is swept.

    :param spec: ModelSpec template
    :param label: swept parameter, e.g. 'hz'
    :param n: size, defaults to spec.n
    :return: MaximumResult, with the F_aa profile over the grid
    """
    axis = SpinAxis(axis)
    if n is not None:
        spec = spec.with_params(n=n)

    def fisher(value):
        F, _ = qfim_fidelity(spec.with_params(**{label: value}), [axis], **kwargs)
        return float(F[0, 0])

    return locate_maximum(fisher, grid, xtol)


@dataclasses.dataclass
class DropRate:
    rate: float
    width: float
    center: float
    resolution_limited: bool = False


def _half_width(distances, values, half, spacing):
    order = np.argsort(distances, kind='stable')
    d, v = distances[order], values[order]
    above = np.nonzero(v >= half)[0]
    if len(above) == 0:
        return None, False
    k = above[0]
    if k == 0:
        return max(d[0], spacing), True
    width = d[k - 1] + (half - v[k - 1]) / (v[k] - v[k - 1]) * (d[k] - d[k - 1])
    return width, k == 1


def drop_rate(grid, values, center):
    """
    Inverse half-maximum width of a dip of `values` around `center`.

    On each side the distance from `center` at which the values first climb
    back to half their maximum is interpolated linearly; the width is the
    mean over the sides that cross. A crossing inside the first grid
    interval is flagged as resolution limited.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.shape != values.shape or len(grid) < 3:
        raise ValueError('need at least 3 grid points with one value each')
    if not grid.min() <= center <= grid.max():
        raise ValueError('sweep does not bracket the center')
    half = np.nanmax(values) / 2
    spacing = float(np.min(np.diff(np.unique(grid))))

    widths, limited = [], False
    for mask in (grid >= center, grid <= center):
        ok = mask & np.isfinite(values)
        width, flag = _half_width(np.abs(grid[ok] - center), values[ok], half, spacing)
        if width is not None:
            widths.append(width)
            limited |= flag
    if not widths:
        raise ValueError('values never reach half their maximum')
    width = float(np.mean(widths))
    if limited:
        logger.warning('drop around %.6g narrower than the sweep resolution %.3g', center, spacing)
    return DropRate(rate=1 / width, width=width, center=center, resolution_limited=limited)


def gap_scaling(spec, sizes, gap_floor=GAP_FLOOR, **solver_kwargs):
    """
    Gap E1 - E0 at fixed couplings over chain sizes, fitted both as
    Delta ~ exp(rate n) and Delta ~ n^m. Gaps below gap_floor are replaced
    by the floor and listed in extras['floored'].

    :return: ScalingReport of quantity 'gap'
    """
    if len(sizes) < 3:
        raise ValueError('gap scaling needs at least 3 sizes')
    gaps, floored = [], []
    for n in sizes:
        gap = solve_lowest(spec.with_params(n=n), **solver_kwargs).gap
        if gap < gap_floor:
            logger.warning('gap %.3g at n=%d below the floor %.1g', gap, n, gap_floor)
            floored.append(int(n))
            gap = gap_floor
        gaps.append(gap)
    return scaling_report('gap', sizes, gaps, extras={'floored': floored, 'floor': gap_floor})


def level_slopes(spec, axes, **solver_kwargs):
    """
    Gap and the slope differences dE_a of the two lowest levels.

    dE_a is the eigenvalue spread of dH/dh_a = -2 S_a inside the lowest
    doublet, which stays finite across an avoided crossing where the gap
    itself is stationary.
    """
    result = solve_lowest(spec, **solver_kwargs)
    doublet = result.vectors[:, :2]
    max_sites = solver_kwargs.get('max_sites', MAX_SITES)
    slopes = {}
    for a in SpinAxis.parse(axes):
        s = build_global_spin(spec.n, a, max_sites)
        m = doublet.conj().T @ s.apply(doublet)
        w = np.linalg.eigvalsh(-2 * (m + m.conj().T) / 2)
        slopes[a] = float(w[-1] - w[0])
    return result.gap, slopes


def first_order_prediction(gaps, slopes_mu, slopes_nu):
    """(dE_mu dE_nu) / Delta0^2 per size."""
    gaps = np.asarray(gaps, dtype=float)
    return np.asarray(slopes_mu, dtype=float) * np.asarray(slopes_nu, dtype=float) / gaps ** 2


def qfim_first_order_scaling(spec, sizes, axes=('z', 'x'), **kwargs):
    """
    QFIM diagonal F_mm(n) at a first-order point next to the prediction
    (dE_m)^2 / Delta0^2, and R_mn(n) next to the bound form
    Delta0^2 / |dE_m dE_n| (up to its unknown prefactor).

    Unless delta0 is given, ladders and loops at each size are scaled to
    CROSSING_RESOLUTION times the width Delta0 / dE of the avoided crossing,
    so that they follow the exact ground state through it.

    :return: ScalingReport of 'F_mm' with the comparison in extras
    """
    mu, nu = SpinAxis.parse(axes)
    solver_kwargs = {k: v for k, v in kwargs.items()
                     if k in ('solver', 'tol', 'max_iter', 'seed', 'max_sites')}
    fisher, r_values, gaps, slopes_mu, slopes_nu = [], [], [], [], []
    for n in sizes:
        spec_n = spec.with_params(n=n)
        gap, slopes = level_slopes(spec_n, (mu, nu), **solver_kwargs)
        options = dict(kwargs)
        if 'delta0' not in options:
            width = max(gap, GAP_FLOOR) / max(slopes[mu], slopes[nu], 1.)
            delta0 = min(DEFAULT_DELTA0, CROSSING_RESOLUTION * width)
            options.update(delta0=delta0, areas=(delta0 ** 2, 4 * delta0 ** 2, 16 * delta0 ** 2))
            logger.info('n=%d: avoided crossing of width %.3g, ladder step %.3g', n, width, delta0)
        tensors = metro_point(spec_n, (mu, nu), **options)
        fisher.append(float(tensors.F_entry(mu, mu)))
        r_values.append(float(tensors.R(mu, nu)))
        gaps.append(max(gap, GAP_FLOOR))
        slopes_mu.append(slopes[mu])
        slopes_nu.append(slopes[nu])

    prediction = first_order_prediction(gaps, slopes_mu, slopes_mu)
    gaps = np.array(gaps)
    with np.errstate(divide='ignore'):
        bound = gaps ** 2 / np.abs(np.array(slopes_mu) * np.array(slopes_nu))
    extras = {
        'gap': gaps.tolist(),
        'prediction': prediction.tolist(),
        'ratio': (np.array(fisher) / prediction).tolist(),
        f'R_{mu.value}{nu.value}': r_values,
        'R_bound_form': bound.tolist(),
    }
    return scaling_report(f'F_{mu.value}{mu.value}', sizes, fisher, extras)
