"""Canonical JSON writer.

Reports must be byte-identical across runs with the same configuration
and seed, so keys are emitted sorted and floats with 17 significant
digits; non-finite floats (legal data here: infinite distortion bounds,
unfittable rates) become the strings "inf"/"-inf"/"nan".
"""

import json
import math

from .errors import ConfigError


def _fmt_float(x):
    if math.isnan(x):
        return '"nan"'
    if x == math.inf:
        return '"inf"'
    if x == -math.inf:
        return '"-inf"'
    return "%.17g" % x


def _emit(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _emit(v, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if not isinstance(k, str):
                raise ConfigError("non-string key %r" % (k,))
            if i:
                out.append(", ")
            out.append(json.dumps(k))
            out.append(": ")
            _emit(obj[k], out)
        out.append("}")
    else:
        raise ConfigError("unserializable value of type %s" % type(obj).__name__)


def dumps(obj):
    out = []
    _emit(obj, out)
    return "".join(out)


def write_json(path, obj):
    text = dumps(obj) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return text
