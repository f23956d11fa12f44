"""Experiment configuration files.

INI syntax with one ``[experiment]`` section and optional
``[variant.NAME]`` sections whose keys override the base values::

    [experiment]
    name = double_scroll_origin
    system = chua
    preset = double_scroll
    equilibrium = 0
    tau = 0.1
    targets = zeta=0.4
    delta = 1.8
    initial = 1.5 -0.253849008275 -2.55651050226

``targets`` lists one entry per unstable mode in block-layout order,
separated by ``;``: ``zeta=VALUE`` for a real mode, ``rho=VALUE theta=auto``
(or an angle in radians) for a complex pair.  ``gain`` optionally replaces
the synthesized matrix, rows separated by ``;``.
"""

import configparser
import dataclasses
import io
import math
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

__all__ = ['ExperimentConfig', 'ConfigError', 'TargetSpec', 'load', 'parse',
           'bundled_names', 'bundled_text']

_BASE = 'experiment'
_VARIANT = 'variant.'
_KEYS = ('name', 'system', 'preset', 'params', 'equilibrium', 'tau', 'targets',
         'delta', 'delta_grid', 'initial', 'horizon', 'steps_per_delay', 'gain',
         'max_wait', 'tol_settle', 'output')
_REQUIRED = ('system', 'equilibrium', 'tau')


class ConfigError(ValueError):
    """Invalid configuration; ``line`` points into the source when known."""

    def __init__(self, msg, line=None, source=None):
        self.line = line
        self.source = source
        where = ''
        if source:
            where = f'{source}:'
        if line is not None:
            where += f'{line}:'
        super().__init__(f'{where} {msg}' if where else msg)


@dataclass(frozen=True)
class TargetSpec:
    """Target for one unstable mode as written in a config."""

    zeta: float = None
    rho: float = None
    theta: float = None     # None: automatic

    def text(self):
        if self.zeta is not None:
            return f'zeta={self.zeta!r}'
        th = 'auto' if self.theta is None else repr(self.theta)
        return f'rho={self.rho!r} theta={th}'


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    system: str
    tau: float
    equilibrium: object             # int index or tuple of floats
    preset: str = None
    params: tuple = ()              # ((key, value), ...)
    targets: tuple = ()             # TargetSpec per unstable mode
    delta: float = None
    delta_grid: tuple = ()
    initial: tuple = None
    horizon: float = 200.0
    steps_per_delay: int = 200
    gain: tuple = None              # rows
    max_wait: float = 500.0
    tol_settle: float = 1e-3
    output: str = None
    variants: tuple = ()            # ((name, ((key, text), ...)), ...)

    @property
    def h(self):
        return self.tau / self.steps_per_delay

    @property
    def grid_horizon(self):
        """Horizon rounded down to the integration grid."""
        from .dde import grid_horizon
        return grid_horizon(self.horizon, self.h)

    @property
    def output_stem(self):
        return self.output or self.name

    def build_system(self):
        from .systems import get_system
        return get_system(self.system, self.preset, **dict(self.params))

    def target_state(self, system=None):
        system = system or self.build_system()
        which = self.equilibrium
        if not isinstance(which, int):
            which = np.array(which, dtype=float)
        return system.equilibrium(which)

    def mode_targets(self, A):
        """Resolve the target list against the block layout of ``A``."""
        from .matlin import real_block_form
        from .synth import ModeTarget
        bf = real_block_form(A)
        unstable = [(i, b) for i, b in enumerate(bf.layout) if b.eigenvalue.real > 0]
        if not unstable:
            return []
        if len(self.targets) != len(unstable):
            raise ConfigError(f"{len(unstable)} unstable mode(s) need targets, "
                              f"{len(self.targets)} given")
        out = []
        for (i, b), t in zip(unstable, self.targets):
            if b.kind == 'real':
                if t.zeta is None:
                    raise ConfigError(f"mode {i} is real (lambda = {b.eigenvalue.real:.6g}); "
                                      "its target must be zeta=...")
                out.append(ModeTarget(i, 'real', zeta=t.zeta))
            else:
                if t.rho is None:
                    raise ConfigError(f"mode {i} is a complex pair; its target must be rho=...")
                out.append(ModeTarget(i, 'complex', rho=t.rho, theta=t.theta))
        return out

    def with_variant(self, name):
        """Config with the overrides of ``[variant.NAME]`` applied."""
        variants = dict(self.variants)
        if name not in variants:
            raise ConfigError(f"no variant {name!r} (have {sorted(variants) or 'none'})")
        cp = self._to_parser(include_variants=False)
        for k, v in variants[name]:
            cp[_BASE][k] = v
        cfg = _from_parser(cp, None)
        return dataclasses.replace(cfg, variants=())

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def _to_parser(self, include_variants=True):
        cp = configparser.ConfigParser(interpolation=None)
        sec = {}
        sec['name'] = self.name
        sec['system'] = self.system
        if self.preset:
            sec['preset'] = self.preset
        if self.params:
            sec['params'] = ', '.join(f'{k}={v!r}' for k, v in self.params)
        sec['equilibrium'] = (str(self.equilibrium) if isinstance(self.equilibrium, int)
                              else _vec_text(self.equilibrium))
        sec['tau'] = repr(self.tau)
        if self.targets:
            sec['targets'] = '; '.join(t.text() for t in self.targets)
        if self.delta is not None:
            sec['delta'] = repr(self.delta)
        if self.delta_grid:
            sec['delta_grid'] = ', '.join(repr(d) for d in self.delta_grid)
        if self.initial is not None:
            sec['initial'] = _vec_text(self.initial)
        sec['horizon'] = repr(self.horizon)
        sec['steps_per_delay'] = str(self.steps_per_delay)
        if self.gain is not None:
            sec['gain'] = '; '.join(_vec_text(r) for r in self.gain)
        sec['max_wait'] = repr(self.max_wait)
        sec['tol_settle'] = repr(self.tol_settle)
        if self.output:
            sec['output'] = self.output
        cp[_BASE] = sec
        if include_variants:
            for vname, items in self.variants:
                cp[_VARIANT + vname] = dict(items)
        return cp

    def to_text(self):
        buf = io.StringIO()
        self._to_parser().write(buf)
        return buf.getvalue()


def _vec_text(v):
    return ' '.join(repr(float(x)) for x in v)


def _line_of(text, section, key):
    if text is None:
        return None
    cur = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r'\[(.+)\]$', s)
        if m:
            cur = m.group(1).strip()
            continue
        if cur == section and re.match(rf'{re.escape(key)}\s*[=:]', s):
            return n
    return None


def _floats(s, what):
    try:
        vals = [float(x) for x in re.split(r'[\s,]+', s.strip()) if x]
    except ValueError:
        raise ValueError(f"{what}: expected numbers, got {s!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"{what}: non-finite value")
    return tuple(vals)


def _float(s, what):
    vals = _floats(s, what)
    if len(vals) != 1:
        raise ValueError(f"{what}: expected one number, got {s!r}")
    return vals[0]


def _targets(s):
    out = []
    for part in s.split(';'):
        part = part.strip()
        if not part:
            continue
        kv = {}
        for tok in part.split():
            if '=' not in tok:
                raise ValueError(f"target entry {tok!r} is not key=value")
            k, v = tok.split('=', 1)
            kv[k.strip()] = v.strip()
        if set(kv) == {'zeta'}:
            z = _float(kv['zeta'], 'zeta')
            if not abs(z) < 1:
                raise ValueError(f"need |zeta| < 1, got {z}")
            out.append(TargetSpec(zeta=z))
        elif set(kv) <= {'rho', 'theta'} and 'rho' in kv:
            rho = _float(kv['rho'], 'rho')
            if not 0 <= rho < 1:
                raise ValueError(f"need 0 <= rho < 1, got {rho}")
            th = kv.get('theta', 'auto')
            theta = None if th == 'auto' else _float(th, 'theta')
            if theta is not None and not 0 <= theta < 2 * math.pi:
                raise ValueError(f"need 0 <= theta < 2 pi, got {theta}")
            out.append(TargetSpec(rho=rho, theta=theta))
        else:
            raise ValueError(f"target {part!r}: use zeta=... or rho=... [theta=...|auto]")
    return tuple(out)


def _params(s):
    out = []
    for part in re.split(r'[,;]', s):
        part = part.strip()
        if not part:
            continue
        if '=' not in part:
            raise ValueError(f"parameter {part!r} is not key=value")
        k, v = part.split('=', 1)
        out.append((k.strip(), _float(v, k.strip())))
    return tuple(out)


def _from_parser(cp, text, source=None):
    if not cp.has_section(_BASE):
        raise ConfigError(f"missing [{_BASE}] section", source=source)
    sec = cp[_BASE]

    def fail(key, msg, section=_BASE):
        raise ConfigError(f"{key}: {msg}", _line_of(text, section, key), source)

    for key in sec:
        if key not in _KEYS:
            fail(key, "unknown key")
    for key in _REQUIRED:
        if key not in sec:
            raise ConfigError(f"missing required key {key!r}", source=source)

    kw = {}
    conv = {
        'tau': lambda s: _float(s, 'tau'),
        'delta': lambda s: _float(s, 'delta'),
        'delta_grid': lambda s: _floats(s, 'delta_grid'),
        'initial': lambda s: _floats(s, 'initial'),
        'horizon': lambda s: _float(s, 'horizon'),
        'max_wait': lambda s: _float(s, 'max_wait'),
        'tol_settle': lambda s: _float(s, 'tol_settle'),
        'targets': _targets,
        'params': _params,
    }
    for key, raw in sec.items():
        try:
            if key in conv:
                kw[key] = conv[key](raw)
            elif key == 'equilibrium':
                raw = raw.strip()
                kw[key] = int(raw) if re.fullmatch(r'\d+', raw) else _floats(raw, key)
            elif key == 'steps_per_delay':
                kw[key] = int(raw)
            elif key == 'gain':
                rows = tuple(_floats(r, 'gain') for r in raw.split(';') if r.strip())
                if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
                    raise ValueError("gain must be a square matrix, rows separated by ';'")
                kw[key] = rows
            else:
                kw[key] = raw.strip()
        except ValueError as exc:
            fail(key, str(exc))

    if not kw['tau'] > 0:
        fail('tau', "must be positive")
    if 'delta' in kw and not kw['delta'] > 0:
        fail('delta', "must be positive")
    if any(d <= 0 for d in kw.get('delta_grid', ())):
        fail('delta_grid', "radii must be positive")
    if kw.get('horizon', 0.0) < 0:
        fail('horizon', "must be non-negative")
    if kw.get('steps_per_delay', 200) < 10:
        fail('steps_per_delay', "must be at least 10")
    if kw['system'] not in ('chua', 'rossler', 'linear'):
        fail('system', f"unknown system {kw['system']!r}")
    kw.setdefault('name', kw.get('output') or 'experiment')

    variants = []
    for s in cp.sections():
        if s == _BASE:
            continue
        if not s.startswith(_VARIANT) or not s[len(_VARIANT):]:
            raise ConfigError(f"unknown section [{s}]", _line_of_section(text, s), source)
        for key in cp[s]:
            if key not in _KEYS or key == 'name':
                fail(key, "not allowed in a variant", section=s)
        variants.append((s[len(_VARIANT):], tuple(cp[s].items())))
    kw['variants'] = tuple(variants)

    cfg = ExperimentConfig(**kw)
    # resolve the system and equilibrium now, so bad references fail early
    try:
        system = cfg.build_system()
    except (KeyError, ValueError) as exc:
        key = 'params' if 'parameter' in str(exc) else ('preset' if 'preset' in str(exc) else 'system')
        fail(key, str(exc).strip('"\''))
    try:
        cfg.target_state(system)
    except (IndexError, ValueError) as exc:
        fail('equilibrium', str(exc))
    if cfg.initial is not None and len(cfg.initial) != system.dim:
        fail('initial', f"needs {system.dim} entries")
    if cfg.gain is not None and len(cfg.gain) != system.dim:
        fail('gain', f"must be {system.dim}x{system.dim}")
    for vname, _ in variants:
        try:
            cfg.with_variant(vname)
        except ConfigError as exc:
            raise ConfigError(f"variant {vname}: {exc}", _line_of_section(text, _VARIANT + vname),
                              source) from None
    return cfg


def _line_of_section(text, section):
    if text is None:
        return None
    for n, line in enumerate(text.splitlines(), 1):
        if line.strip() == f'[{section}]':
            return n
    return None


def parse(text, source=None):
    """Parse config text into an :class:`ExperimentConfig`."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#',))
    try:
        cp.read_string(text, source=source or '<config>')
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, 'lineno', None), source) from None
    return _from_parser(cp, text, source)


def bundled_names():
    root = resources.files('tdfc') / 'configs'
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith('.ini'))


def bundled_text(name):
    p = resources.files('tdfc') / 'configs' / f'{name}.ini'
    if not p.is_file():
        raise ConfigError(f"no bundled config {name!r} (have {', '.join(bundled_names())})")
    return p.read_text()


def load(path_or_name):
    """Read a config file, or a bundled config by name."""
    import os
    if os.path.exists(path_or_name):
        with open(path_or_name) as fh:
            return parse(fh.read(), source=path_or_name)
    if os.sep in path_or_name or path_or_name.endswith('.ini'):
        raise ConfigError(f"config file {path_or_name!r} not found")
    return parse(bundled_text(path_or_name), source=path_or_name)
