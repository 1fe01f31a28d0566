"""
Parameter scans and scaling campaigns over grids of model couplings and
chain sizes, with deterministic CSV/JSON output.
"""
import concurrent.futures
import configparser
import csv
import dataclasses
import itertools
import json
import logging
import math

import numpy as np

from .eigen import DEFAULT_MAX_ITER, ground_state_tracked
from .freefermion import MAX_FREE_SITES, xy_rotation_metrology
from .metrology import DEFAULT_AREAS, DEFAULT_DELTA0, DEFAULT_LADDER, METHODS, metro_point
from .models import MAX_SITES, ModelKind, ModelSpec
from .operators import SpinAxis
from .scaling import locate_critical_point, scaling_report

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json')
DIGITS = 12


class ConfigError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class Sweep:
    """label swept linearly from start to stop in `steps` points."""

    label: str
    start: float
    stop: float
    steps: int

    @classmethod
    def parse(cls, text):
        parts = text.strip().split(':')
        if len(parts) != 4:
            raise ConfigError(f'sweep {text!r} is not label:start:stop:steps')
        label, start, stop, steps = parts
        try:
            return cls(label.strip(), float(start), float(stop), int(steps))
        except ValueError:
            raise ConfigError(f'sweep {text!r} has non-numeric bounds')

    def values(self):
        return np.linspace(self.start, self.stop, self.steps)

    def __str__(self):
        return f'{self.label}:{self.start!r}:{self.stop!r}:{self.steps}'


def _floats(text):
    return tuple(float(v) for v in str(text).replace(';', ',').split(',') if v.strip())


def _ints(text):
    return tuple(int(v) for v in str(text).replace(';', ',').split(',') if v.strip())


def _words(text):
    return tuple(v.strip() for v in str(text).replace(';', ',').split(',') if v.strip())


def _flag(text):
    value = str(text).strip().lower()
    if value in ('1', 'yes', 'true', 'on'):
        return True
    if value in ('0', 'no', 'false', 'off'):
        return False
    raise ValueError(text)


def _sweeps(text):
    return tuple(Sweep.parse(s) for s in str(text).split(';') if s.strip())


@dataclasses.dataclass
class ScanConfig:
    """
    Everything that defines a campaign. Sizes are evaluated in the given
    order, the sweep grid is the Cartesian product of all sweeps. With
    locate_critical, scaling campaigns evaluate each size at the maximum of
    F_aa (a = critical_axis) over the single sweep instead of at the fixed
    couplings.
    """

    model: str = 'ferro'
    sizes: tuple = (11,)
    hx: float = 0.
    hy: float = 0.
    hz: float = 0.
    gamma: float = 1.
    lam: float = 0.
    sweep: tuple = ()
    axes: str = 'xyz'
    method: str = 'fidelity_bargmann'
    delta0: float = DEFAULT_DELTA0
    ladder: int = DEFAULT_LADDER
    areas: tuple = DEFAULT_AREAS
    tol: float = 1e-10
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = 0
    solver: str = 'lanczos'
    workers: int = 1
    max_sites: int = MAX_SITES
    quantities: tuple = ()
    critical_axis: str = 'x'
    critical_tol: float = 1e-3
    locate_critical: bool = False
    out: str = None
    format: str = 'csv'
    synthetic: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            kind = ModelKind.parse(self.model)
        except ValueError:
            raise ConfigError(f'unknown model {self.model!r}')
        self.model = kind.value
        self.sizes = tuple(int(n) for n in self.sizes)
        self.areas = tuple(float(a) for a in self.areas)
        self.sweep = tuple(s if isinstance(s, Sweep) else Sweep.parse(s) for s in self.sweep)
        self.quantities = tuple(self.quantities)
        try:
            self.axes = ''.join(a.value for a in SpinAxis.parse(self.axes))
            SpinAxis(self.critical_axis)
        except ValueError as err:
            raise ConfigError(str(err))

        if not self.sizes:
            raise ConfigError('no sizes given')
        if self.method not in METHODS:
            raise ConfigError(f'unknown method {self.method!r}')
        if self.method == 'exact_rotation' and kind is not ModelKind.XY_CHAIN:
            raise ConfigError('exact_rotation needs the xy model')
        if self.format not in FORMATS:
            raise ConfigError(f'unknown format {self.format!r}')
        if self.solver not in ('lanczos', 'dense'):
            raise ConfigError(f'unknown solver {self.solver!r}')
        for name in ('delta0', 'tol', 'max_iter', 'ladder', 'workers', 'max_sites', 'critical_tol'):
            if not getattr(self, name) > 0:
                raise ConfigError(f'{name} must be positive')
        if self.locate_critical and len(self.sweep) != 1:
            raise ConfigError('locating the critical point needs exactly one sweep')
        if self.ladder < 4:
            raise ConfigError('ladder needs K >= 4')
        if len(self.areas) < 3 or min(self.areas) <= 0:
            raise ConfigError('need at least three positive loop areas')

        spec = self._base_spec(self.sizes[0])
        for s in self.sweep:
            if s.label not in spec.parameters:
                raise ConfigError(f'{s.label!r} is not a parameter of the {self.model} model')
            if s.steps < 2:
                raise ConfigError(f'sweep {s} needs at least 2 steps')
        for n in self.sizes:
            limit = MAX_FREE_SITES if self.uses_free_fermions(n) else self.max_sites
            if not 3 <= n <= limit:
                raise ConfigError(f'size {n} outside 3..{limit}')

    def _base_spec(self, n):
        try:
            return ModelSpec(self.model, n, self.hx, self.hy, self.hz, self.gamma, self.lam)
        except ValueError as err:
            raise ConfigError(str(err))

    def spec(self, n, point=None):
        return self._base_spec(n).with_params(**(point or {}))

    def points(self):
        """Sweep grid as a list of {label: value}; one empty point without sweeps."""
        grids = [[(s.label, float(v)) for v in s.values()] for s in self.sweep]
        return [dict(combo) for combo in itertools.product(*grids)]

    def tasks(self):
        return [(self, n, point) for n in self.sizes for point in self.points()]

    def uses_free_fermions(self, n):
        return self.method == 'exact_rotation' and n > self.max_sites

    def solver_kwargs(self):
        return dict(tol=self.tol, max_iter=self.max_iter, seed=self.seed, solver=self.solver,
                    max_sites=self.max_sites)

    def metro_columns(self):
        axes = self.axes
        cols = [f'F_{a}{b}' for i, a in enumerate(axes) for b in axes[i:]]
        pairs = [a + b for a, b in itertools.combinations(axes, 2)]
        cols += [f'U_{p}' for p in pairs] + [f'R_{p}' for p in pairs] + ['R_full']
        return cols

    def columns(self):
        spec = self._base_spec(self.sizes[0])
        return (['n'] + list(spec.parameters) + ['E0', 'E1', 'gap'] + self.metro_columns()
                + ['degenerate', 'flags'])

    def echo(self):
        """Every knob, defaults included, as plain JSON values."""
        out = {}
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if field.name == 'sweep':
                value = [str(s) for s in value]
            elif isinstance(value, tuple):
                value = list(value)
            elif isinstance(value, dict):
                value = {k: list(v) for k, v in value.items()}
            out[field.name] = value
        return out


_CONVERTERS = {
    'sizes': _ints, 'areas': _floats, 'sweep': _sweeps, 'quantities': _words,
    'hx': float, 'hy': float, 'hz': float, 'gamma': float, 'lam': float, 'lambda': float,
    'delta0': float, 'tol': float, 'critical_tol': float,
    'ladder': int, 'max_iter': int, 'seed': int, 'workers': int, 'max_sites': int,
    'locate_critical': _flag,
}


def load_config(path=None, overrides=None):
    """
    ScanConfig from an INI file with a [scan] section (and an optional
    [synthetic] section of quantity = values), then command-line overrides.
    None values in overrides are ignored.
    """
    values = {}
    synthetic = {}
    if path is not None:
        parser = configparser.ConfigParser()
        try:
            with open(path) as f:
                parser.read_file(f)
        except (OSError, configparser.Error) as err:
            raise ConfigError(f'cannot read config {path}: {err}')
        if not parser.has_section('scan'):
            raise ConfigError(f'config {path} has no [scan] section')
        values.update(parser.items('scan'))
        if parser.has_section('synthetic'):
            synthetic = {k: _floats(v) for k, v in parser.items('synthetic')}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})

    known = {f.name for f in dataclasses.fields(ScanConfig)}
    kwargs = {}
    for key, value in values.items():
        name = 'lam' if key == 'lambda' else key
        if name not in known:
            raise ConfigError(f'unknown config key {key!r}')
        convert = _CONVERTERS.get(name)
        try:
            kwargs[name] = convert(value) if convert and isinstance(value, str) else value
        except ValueError:
            raise ConfigError(f'bad value {value!r} for {key!r}')
    if synthetic:
        kwargs['synthetic'] = synthetic
    return ScanConfig(**kwargs)


@dataclasses.dataclass
class ScanRow:
    n: int
    params: dict
    E0: float
    E1: float
    gap: float
    metro: dict
    degenerate: bool = False
    flags: dict = dataclasses.field(default_factory=dict)
    failed: bool = False

    def values(self, columns):
        record = dict(self.params, n=self.n, E0=self.E0, E1=self.E1, gap=self.gap,
                      degenerate=int(self.degenerate),
                      flags=';'.join(f'{k}:{v}' for k, v in sorted(self.flags.items())))
        record.update(self.metro)
        return [record.get(c, np.nan) for c in columns]


@dataclasses.dataclass
class ScanTable:
    columns: list
    rows: list = dataclasses.field(default_factory=list)

    @property
    def failures(self):
        return sum(1 for r in self.rows if r.failed)

    def column(self, name):
        i = self.columns.index(name)
        return [r.values(self.columns)[i] for r in self.rows]

    def records(self):
        return [r.values(self.columns) for r in self.rows]


def evaluate_point(task):
    """One ScanRow; failures become flagged rows of nan."""
    config, n, point = task
    spec = config.spec(n, point)
    params = {label: spec.param(label) for label in spec.parameters}
    try:
        if config.uses_free_fermions(n):
            tensors = xy_rotation_metrology(n, spec.gamma, spec.lam, config.axes)
            e0, e1, degenerate = tensors.diagnostics['energy'], np.nan, False
            flags = dict(tensors.flags, E1='free_fermion')
        else:
            eig = ground_state_tracked(spec, **config.solver_kwargs())
            e0, e1, degenerate = eig.E0, eig.E1, eig.degenerate
            tensors = metro_point(spec, config.axes, config.method, delta0=config.delta0,
                                  ladder=config.ladder, areas=config.areas,
                                  **config.solver_kwargs())
            flags = dict(tensors.flags)
    except (ValueError, RuntimeError) as err:
        logger.warning('point n=%d %s failed: %s', n, point, err)
        return ScanRow(n, params, np.nan, np.nan, np.nan,
                       dict.fromkeys(config.metro_columns(), np.nan),
                       flags={'error': type(err).__name__}, failed=True)
    return ScanRow(n, params, e0, e1, e1 - e0, tensors.columns(), degenerate, flags)


def format_value(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return 'nan'
    return format(value, f'.{DIGITS}g')


class TableWriter(object):
    """
    Writes rows as they arrive. CSV rows are flushed one by one; JSON is
    written once the table is closed.
    """

    def __init__(self, path, fmt, columns, config=None):
        self.path = path
        self.fmt = fmt
        self.columns = columns
        self.config = config
        self.records = []
        self.reports = []
        self._file = None
        if path is not None and fmt == 'csv':
            self._file = open(path, 'w', newline='')
            self._csv = csv.writer(self._file, lineterminator='\n')
            self._csv.writerow(columns)
            self._file.flush()

    def write(self, row):
        record = row.values(self.columns)
        self.records.append(record)
        if self._file is not None:
            self._csv.writerow([format_value(v) for v in record])
            self._file.flush()

    def close(self):
        if self._file is not None:
            self._file.close()
            self._file = None
        elif self.path is not None and self.fmt == 'json':
            write_json(self.path, self.config, self.columns, self.records, self.reports)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_json_value(v) for v in value]
    return value


def write_json(path, config, columns, records, reports=()):
    obj = {
        'config': _json_value(config.echo()) if config is not None else {},
        'columns': list(columns),
        'rows': _json_value(records),
        'reports': [_json_value(r.as_dict() if hasattr(r, 'as_dict') else r) for r in reports],
    }
    with open(path, 'w', newline='\n') as f:
        json.dump(obj, f, indent=2, allow_nan=False)
        f.write('\n')


def run_scan(config, path=None, fmt=None):
    """
    Evaluates every (size, point) task, in parallel with config.workers
    processes, and writes rows in size-major sweep order.

    :return: ScanTable
    """
    path = config.out if path is None else path
    fmt = fmt or config.format
    table = ScanTable(config.columns())
    tasks = config.tasks()
    logger.info('scanning %d points with %d workers', len(tasks), config.workers)

    with TableWriter(path, fmt, table.columns, config) as writer:
        if config.workers == 1:
            results = map(evaluate_point, tasks)
            executor = None
        else:
            executor = concurrent.futures.ProcessPoolExecutor(max_workers=config.workers)
            results = executor.map(evaluate_point, tasks)
        try:
            for row in results:
                table.rows.append(row)
                writer.write(row)
        except KeyboardInterrupt:
            logger.warning('interrupted after %d of %d rows', len(table.rows), len(tasks))
            if executor is not None:
                executor.shutdown(wait=True, cancel_futures=True)
                executor = None
            raise
        finally:
            if executor is not None:
                executor.shutdown()
    return table


def derived_values(table, quantity, axes):
    """Column values, or det_F / det_2U of the first two axes."""
    if quantity in ('det_F', 'det_2U'):
        a, b = axes[0], axes[1]
        faa, fbb, fab = (np.array(table.column(f'F_{x}'), dtype=float)
                         for x in (a + a, b + b, a + b))
        if quantity == 'det_F':
            return faa * fbb - fab ** 2
        return 4 * np.array(table.column(f'U_{a}{b}'), dtype=float) ** 2
    if quantity not in table.columns:
        raise ConfigError(f'unknown quantity {quantity!r}')
    return np.array(table.column(quantity), dtype=float)


def _locate(config, n):
    sweep = config.sweep[0]
    if sweep.steps < 5:
        raise ConfigError('critical-point search needs at least 5 sweep points')
    return locate_critical_point(config.spec(n), sweep.label, sweep.values(),
                                 axis=config.critical_axis, xtol=config.critical_tol,
                                 delta0=config.delta0, ladder=config.ladder,
                                 **config.solver_kwargs())


def _critical_table(config):
    """One row per size, evaluated where F_aa peaks along the sweep."""
    label = config.sweep[0].label
    fixed = dataclasses.replace(config, sweep=(), locate_critical=False, out=None)
    table = ScanTable(config.columns())
    located = []
    for n in config.sizes:
        found = _locate(config, n)
        if found.on_boundary:
            logger.warning('n=%d: maximum of F along %s on the sweep boundary', n, label)
        logger.info('n=%d: critical %s = %.6g', n, label, found.x)
        located.append(found.x)
        table.rows.append(evaluate_point((fixed, n, {label: found.x})))
    return table, located


def run_scaling(config, path=None, fmt=None):
    """
    One scaling report per selected quantity. Synthetic values from the
    config bypass the scan. With config.locate_critical every size is
    evaluated at its own located critical point, and the drift of that
    point is reported as the quantity '<label>_critical'.

    :return: (ScanTable or None, list of ScalingReport)
    """
    path = config.out if path is None else path
    fmt = fmt or config.format
    if len(config.sizes) < 3:
        raise ConfigError('scaling needs at least 3 sizes')
    reports = []

    if config.synthetic:
        table = None
        for quantity, values in config.synthetic.items():
            reports.append(scaling_report(quantity, config.sizes, values))
    else:
        if config.sweep and not config.locate_critical:
            raise ConfigError('scaling campaigns evaluate a single point, remove the sweep')
        if any(q in ('det_F', 'det_2U') for q in config.quantities) and len(config.axes) < 2:
            raise ConfigError('determinants need two axes')
        series = {}
        if config.locate_critical:
            table, located = _critical_table(config)
            series[config.sweep[0].label + '_critical'] = located
        else:
            table = run_scan(dataclasses.replace(config, out=None))
        for quantity in config.quantities or ('gap',):
            series[quantity] = derived_values(table, quantity, config.axes)
        for quantity, values in series.items():
            try:
                reports.append(scaling_report(quantity, config.sizes, values))
            except ValueError as err:
                logger.warning('no scaling fit for %s: %s', quantity, err)

    if path is not None:
        emit_reports(path, fmt, reports, config, table)
    return table, reports


def emit_reports(path, fmt, reports, config=None, table=None):
    if fmt == 'json':
        columns = table.columns if table is not None else []
        records = table.records() if table is not None else []
        write_json(path, config, columns, records, reports)
        return
    columns = ['quantity', 'preferred', 'score', 'm', 'a', 'r2_power', 'A', 'rate', 'r2_exponential']
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for r in reports:
            p, e = r.power, r.exponential
            writer.writerow([r.quantity, r.preferred] + [format_value(v) for v in (
                r.score, p['m'], p['a'], p.r2, e['A'], e['rate'], e.r2)])


def emit(table, path, fmt='csv', config=None, reports=()):
    """Writes a finished ScanTable as CSV or JSON."""
    if fmt not in FORMATS:
        raise ValueError(f'unknown format {fmt!r}')
    if fmt == 'json':
        write_json(path, config, table.columns, table.records(), reports)
        return
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(table.columns)
        for record in table.records():
            writer.writerow([format_value(v) for v in record])


def run_critical_point(config, path=None, fmt=None):
    """
    F_aa profile over the (single) sweep and its refined maximum per size.

    :return: (ScanTable of n, label, F_aa; list of result dicts)
    """
    path = config.out if path is None else path
    fmt = fmt or config.format
    if len(config.sweep) != 1:
        raise ConfigError('critical-point search needs exactly one sweep')
    label = config.sweep[0].label
    axis = config.critical_axis
    table = ScanTable(['n', label, f'F_{axis}{axis}', 'degenerate', 'flags'])
    results = []
    for n in config.sizes:
        found = _locate(config, n)
        for x, value in zip(found.grid, found.profile):
            table.rows.append(ScanRow(n, {label: float(x)}, np.nan, np.nan, np.nan,
                                      {f'F_{axis}{axis}': float(value)}))
        results.append({'n': n, 'label': label, 'x': found.x, 'value': found.value,
                        'on_boundary': found.on_boundary})
    if path is not None:
        emit(table, path, fmt, config, results)
    return table, results
