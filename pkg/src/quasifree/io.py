"""JSON formats for spaces, states and channels, and the built-in function registry.

A channel file looks like::

    {"in": {"n": 1, "s": 0}, "out": {"n": 1, "s": 0},
     "S": [[1, 0], [0, 1]],
     "noise": {"type": "gaussian", "lam": [0, 0], "B": [[0.5, 0], [0, 0.5]]}}

``S`` has shape ``(dim in, dim out)``. ``out`` defaults to ``in``, a missing
``noise`` means ``f = 1``. Besides ``gaussian`` the noise may be
``{"type": "builtin", "name": "cauchy:gamma=0.5"}``; see :data:`BUILTINS`.
States use the same bodies with a ``space`` key.
"""

from __future__ import annotations

import json

import numpy as np

from . import channel as chn
from . import charfun as cf
from .phasespace import PhaseMap, PhaseSpace, delta_sigma


class SpecError(ValueError):
    """Malformed specification; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _need(obj, key, where):
    if not isinstance(obj, dict):
        raise SpecError(where, "expected a JSON object")
    if key not in obj:
        raise SpecError(f"{where}.{key}" if where else key, "missing required field")
    return obj[key]


def _matrix(value, shape, field):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError(field, f"not a numeric array ({exc})") from None
    if arr.size == 0 and 0 in shape:
        return np.zeros(shape)
    if arr.shape != shape:
        raise SpecError(field, f"expected shape {shape}, got {arr.shape}")
    return arr


def parse_space(obj, field="space"):
    try:
        return PhaseSpace.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(field, str(exc)) from None


# ---------------------------------------------------------------------------
# built-in functions


def _params(text):
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise SpecError("name", f"parameter {item!r} is not of the form key=value")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise SpecError("name", f"parameter {key!r} is not a number") from None
    return name.strip(), params


def _one(space):
    return cf.point_measure(space)


def _vacuum(space):
    return cf.gaussian_charfn(space, None, 0.5 * np.eye(space.dim))


def _iso(space, var=1.0):
    return cf.gaussian_charfn(space, None, var * np.eye(space.dim))


def _cauchy(space, gamma=1.0):
    """``exp(-gamma |xi|)``: a classical isotropic Cauchy-type law."""
    return cf.general_charfn(space, lambda X: np.exp(-gamma * np.linalg.norm(X, axis=-1)) + 0j,
                             f"cauchy(gamma={gamma!r})")


def _uniform(space, width=1.0):
    """Product of ``sinc``: the uniform law on a cube of side ``width``."""
    return cf.general_charfn(space, lambda X: np.prod(np.sinc(width * np.asarray(X) / (2 * np.pi)), axis=-1) + 0j,
                             f"uniform(width={width!r})")


def _tms(space, **kw):
    from .protocols import two_mode_squeezed

    lam = kw.get("lambda", 0.0)
    chi = two_mode_squeezed(lam)
    if space is not None and space.dim != chi.space.dim:
        raise SpecError("name", "two_mode_squeezed needs a 4-dimensional space")
    return chi


BUILTINS = {
    "one": _one,
    "vacuum": _vacuum,
    "iso": _iso,
    "cauchy": _cauchy,
    "uniform": _uniform,
    "two_mode_squeezed": _tms,
}


def builtin(text, space):
    name, params = _params(text)
    if name not in BUILTINS:
        raise SpecError("name", f"unknown builtin {name!r}; known: {', '.join(sorted(BUILTINS))}")
    try:
        return BUILTINS[name](space, **params)
    except TypeError as exc:
        raise SpecError("name", str(exc)) from None


def parse_body(obj, space, field):
    kind = _need(obj, "type", field)
    d = space.dim
    if kind == "gaussian":
        lam = _matrix(obj.get("lam", obj.get("mean", np.zeros(d))), (d,), f"{field}.lam")
        B = _matrix(obj.get("B", obj.get("cov", np.zeros((d, d)))), (d, d), f"{field}.B")
        try:
            return cf.gaussian_charfn(space, lam, B)
        except ValueError as exc:
            raise SpecError(f"{field}.B", str(exc)) from None
    if kind == "builtin":
        name = _need(obj, "name", field)
        try:
            return builtin(str(name), space)
        except SpecError as exc:
            raise SpecError(f"{field}.{exc.field}", str(exc).partition(": ")[2]) from None
    raise SpecError(f"{field}.type", f"unknown noise type {kind!r} (gaussian or builtin)")


def parse_state(obj, field="state"):
    space = parse_space(_need(obj, "space", field), f"{field}.space")
    return parse_body(obj, space, field)


def parse_channel(obj, verify="auto", policy=None):
    """Build a :class:`~quasifree.channel.QuasifreeChannel`; raises :class:`SpecError` or ``PositivityError``."""
    inn = parse_space(_need(obj, "in", ""), "in")
    out = parse_space(obj["out"], "out") if "out" in obj else inn
    S = PhaseMap(out, inn, _matrix(_need(obj, "S", ""), (inn.dim, out.dim), "S"))
    noise_space = PhaseSpace(delta_sigma(S))
    f = parse_body(obj["noise"], noise_space, "noise") if "noise" in obj else None
    return chn.make_channel(S, f, verify=obj.get("verify", verify), policy=policy)


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecError("file", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise SpecError("file", str(exc)) from None


def channel_to_json(ch):
    if not ch.is_gaussian:
        raise TypeError("only Gaussian channels are serialisable")
    g = ch.gaussian
    return {
        "in": g.in_space.to_json(),
        "out": g.out_space.to_json(),
        "S": g.S.matrix.tolist(),
        "noise": {"type": "gaussian", "lam": g.lam.tolist(), "B": g.B.tolist()},
    }


def state_to_json(chi):
    if not chi.is_gaussian:
        raise TypeError("only Gaussian states are serialisable")
    return {"space": chi.space.to_json(), "type": "gaussian", "mean": chi.mean.tolist(), "cov": chi.cov.tolist()}
