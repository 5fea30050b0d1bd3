#!/usr/bin/python3

"""Run parameters: built-in defaults, JSON config file, command-line flags.

Precedence is flags > config file > SOMQE_SEED (seed only) > defaults.

The config file is a JSON object with optional sections; see
docs/config.rst.  Each entry of PARAMS below maps a resolved parameter
to its section and key in the file.
"""

import json
import logging
import os

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

SEED_ENV = 'SOMQE_SEED'

def int0(s):
    if isinstance(s, bool):
        raise ValueError('not an integer: %r' % s)
    if isinstance(s, str):
        s = s.strip().lower()
        return int(s, 16) if s.startswith('0x') else int(s)
    if isinstance(s, float) and not s.is_integer():
        raise ValueError('not an integer: %r' % s)
    return int(s)

def bool0(s):
    if isinstance(s, bool):
        return s
    return str(s).lower().strip() in ('1', 'true', 'yes')

def deltas0(s):
    if isinstance(s, str):
        s = [x for x in s.replace(',', ' ').split() if x]
    return [float(x) for x in s]

def str0(s):
    if not isinstance(s, str):
        raise ValueError('not a string: %r' % (s,))
    return s

# (parameter, section, key, converter, default, help)
PARAMS = (
    ('rows', 'som', 'rows', int0, 4, 'map rows'),
    ('cols', 'som', 'cols', int0, 4, 'map columns'),
    ('radius', 'som', 'initial_radius', float, 1.2, 'initial neighborhood radius, lattice units'),
    ('alpha', 'som', 'initial_learning_rate', float, 0.2, 'initial learning rate'),
    ('iters', 'som', 'iterations', int0, 10000, 'training iterations'),
    ('strategy', 'features', 'strategy', str0, 'position', 'vector extraction: pixel, patch or position'),
    ('patch', 'features', 'k', int0, 4, 'patch side for --strategy patch'),
    ('mode', 'analysis', 'mode', str0, 'reference', 'training mode: reference or per-image'),
    ('workers', 'analysis', 'workers', int0, 1, 'scoring threads'),
    ('timings', 'analysis', 'timings', bool0, False, 'write wall times into CSV/JSON reports'),
    ('threshold', 'analysis', 'threshold', float, None, 'flag images whose QE exceeds the reference QE by this relative amount'),
    ('kind', 'series', 'kind', str0, None, 'series kind'),
    ('width', 'series', 'width', int0, 792, 'image width, pixels'),
    ('height', 'series', 'height', int0, 777, 'image height, pixels'),
    ('deltas', 'series', 'deltas', deltas0, None, 'per-image change in percent, comma separated (default per kind)'),
    ('baseline', 'series', 'baseline_density', float, 20.0, 'reference foreground density in percent (random kinds)'),
    ('cells', 'series', 'cells', int0, None, 'checker grid cells per side (default 5 count, 3 size)'),
    ('format', 'series', 'format', str0, 'pgm', 'image file format: pgm or png'),
    ('seed', None, 'seed', int0, 0, 'seed for image generation and SOM training'),
)

DEFAULTS = dict((p[0], p[4]) for p in PARAMS)
HELP = dict((p[0], p[5]) for p in PARAMS)
SECTIONS = ('som', 'features', 'analysis', 'series')

def _convert(name, conv, value):
    try:
        return conv(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError('bad value %r for %s: %s' % (value, name, e))

def load_config(path):
    "Read a config file into {parameter: value} for the keys it sets."
    try:
        with open(path) as f:
            raw = json.load(f)
    except ValueError as e:
        raise ConfigurationError('%s: not valid JSON (%s)' % (path, e))
    if not isinstance(raw, dict):
        raise ConfigurationError('%s: top level must be an object' % path)

    known = {}
    for name, section, key, conv, default, _ in PARAMS:
        known[(section, key)] = (name, conv)

    ret = {}
    for k, v in raw.items():
        if k in SECTIONS:
            if not isinstance(v, dict):
                raise ConfigurationError('%s: section %r must be an object' % (path, k))
            items = [((k, kk), vv) for kk, vv in v.items()]
        else:
            items = [((None, k), v)]
        for where, value in items:
            if value is None:
                continue
            if where not in known:
                raise ConfigurationError('%s: unknown key %s' % (path, '.'.join(x for x in where if x)))
            name, conv = known[where]
            ret[name] = _convert(name, conv, value)
    logger.debug('config %s: %r', path, ret)
    return ret

def resolve(flags, file_config=None, environ=None):
    """Merge flag values (None meaning unset) over the config file over
    the defaults.  Returns the complete parameter dict."""
    file_config = file_config or {}
    environ = os.environ if environ is None else environ
    ret = {}
    for name, section, key, conv, default, _ in PARAMS:
        v = flags.get(name)
        if v is not None:
            ret[name] = _convert(name, conv, v)
        elif name in file_config:
            ret[name] = file_config[name]
        elif name == 'seed' and environ.get(SEED_ENV):
            ret[name] = _convert(SEED_ENV, conv, environ[SEED_ENV])
        else:
            ret[name] = default
    return ret

def som_params(params):
    "SomConfig keyword arguments (without dim)."
    return {'rows': params['rows'], 'cols': params['cols'],
            'initial_radius': params['radius'],
            'initial_learning_rate': params['alpha'],
            'iterations': params['iters'], 'seed': params['seed']}
