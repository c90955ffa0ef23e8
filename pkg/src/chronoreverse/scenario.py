"""Scenario files: JSON schema, loading, canonical dumping and random generation.

On disk a scenario is a UTF-8 JSON object::

    {"kind": "channel", "seed": 1, "tolerances": {"check": 1e-9},
     "payload": {"kraus": [...], "state": [...]}}

Matrices are row-major nested arrays. A complex entry is an ``[re, im]`` pair;
a bare number is read as a real entry. The payload layout per kind is given by
:data:`PAYLOAD_SCHEMAS`. Loading validates structure with ``jsonschema`` and
then the mathematical invariants (stochasticity, Hermiticity, completeness,
...) so that a bad file fails before any computation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import randomgen
from .channels import ChannelFlow, KrausMap, as_density, validate
from .classical import ChainFlow, as_distribution, as_stochastic, stationary_distribution
from .errors import InputError, ParseError, SchemaError, UnsupportedKind
from .linalg import Tolerances, default_tolerances, hermitian
from .pathspace import ProjectorFamily, PathSpaceSpec

KINDS = ("classical", "channel", "dual_flow", "pathspace")

_number = {"type": "number"}
_entry = {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}
_cmatrix = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _entry}}
_rmatrix = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _number}}
_rvector = {"type": "array", "minItems": 1, "items": _number}
_kraus = {"type": "array", "minItems": 1, "items": _cmatrix}


def _obj(required: dict, optional: dict | None = None) -> dict:
    props = dict(required)
    props.update(optional or {})
    return {"type": "object", "properties": props, "required": sorted(required), "additionalProperties": False}


PAYLOAD_SCHEMAS = {
    "classical": _obj(
        {"transitions": {"type": "array", "minItems": 1, "items": _rmatrix}, "initial": _rvector},
        {"stationary": _rvector, "alternative_initial": _rvector, "steps": {"type": "integer", "minimum": 0}},
    ),
    "channel": _obj(
        {"kraus": _kraus, "state": _cmatrix},
        {"sigma": _cmatrix, "observables": {"type": "array", "minItems": 1, "items": _cmatrix}},
    ),
    "dual_flow": _obj({"channels": {"type": "array", "minItems": 1, "items": _kraus}, "rho0": _cmatrix, "sigma0": _cmatrix}),
    "pathspace": _obj(
        {"families": {"type": "array", "minItems": 1, "items": _kraus}, "channels": {"type": "array", "items": _kraus},
         "initial": _cmatrix},
        {"rho0": _cmatrix, "eps_grid": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}}},
    ),
}

_TOL_SCHEMA = {
    "type": "object",
    "properties": {k: {"type": "number", "minimum": 0} for k in Tolerances().as_dict()},
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(KINDS)},
        "payload": {"type": "object"},
        "tolerances": _TOL_SCHEMA,
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["kind", "payload"],
    "additionalProperties": False,
}

# payload fields holding real data; everything else matrix-valued is complex
_REAL_FIELDS = {"transitions", "initial", "stationary", "alternative_initial", "eps_grid"}


@dataclass
class Scenario:
    kind: str
    payload: dict
    tolerances: Tolerances = field(default_factory=default_tolerances)
    seed: int | None = None
    tolerance_overrides: dict = field(default_factory=dict)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(0 if self.seed is None else self.seed)

    # -- typed views of the payload ------------------------------------

    def chain_flow(self) -> ChainFlow:
        return ChainFlow.from_initial(self.payload["transitions"], self.payload["initial"])

    def kraus_map(self) -> KrausMap:
        return KrausMap(tuple(self.payload["kraus"]))

    def channel_sequence(self) -> list[KrausMap]:
        return [KrausMap(tuple(ops)) for ops in self.payload["channels"]]

    def path_spec(self) -> PathSpaceSpec:
        fams = tuple(ProjectorFamily(tuple(f)) for f in self.payload["families"])
        return PathSpaceSpec(fams, tuple(self.channel_sequence()), self.payload["initial"])

    @property
    def dim(self) -> int:
        p = self.payload
        key = {"classical": "initial", "channel": "state", "dual_flow": "rho0", "pathspace": "initial"}[self.kind]
        return len(p[key])

    @property
    def steps(self) -> int:
        p = self.payload
        if self.kind == "classical":
            return len(p["transitions"])
        if self.kind == "channel":
            return 1
        return len(p["channels"])

    def summary(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "steps": self.steps, "seed": self.seed}


# ---------------------------------------------------------------------------
# decoding


def _decode(value, path: str, real: bool):
    try:
        if real:
            return np.asarray(value, dtype=float)
        rows = []
        for row in value:
            rows.append([complex(e[0], e[1]) if isinstance(e, list) else complex(e) for e in row])
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise ValueError("ragged rows")
        return np.asarray(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: not a rectangular array ({exc})") from None


def _decode_payload(kind: str, raw: dict) -> dict:
    out = {}
    for key, value in raw.items():
        real = key in _REAL_FIELDS
        path = f"payload.{key}"
        if key in ("kraus", "observables"):
            out[key] = [_decode(m, f"{path}[{k}]", False) for k, m in enumerate(value)]
        elif key in ("channels", "families"):
            out[key] = [[_decode(m, f"{path}[{t}][{k}]", False) for k, m in enumerate(ops)] for t, ops in enumerate(value)]
        elif key == "transitions":
            out[key] = [_decode(m, f"{path}[{t}]", True) for t, m in enumerate(value)]
        elif key == "steps":
            out[key] = int(value)
        else:
            out[key] = _decode(value, path, real)
    return out


def _semantic_check(sc: Scenario):
    """Build every typed object once so invariant violations surface as SchemaError."""
    p, t = sc.payload, sc.tolerances

    def guard(path, fn, *args):
        try:
            return fn(*args)
        except InputError as exc:
            raise SchemaError(f"{path}: {exc}") from None

    if sc.kind == "classical":
        ps = [guard(f"payload.transitions[{k}]", as_stochastic, m, f"P({k})") for k, m in enumerate(p["transitions"])]
        n = ps[0].shape[0]
        if any(m.shape[0] != n for m in ps):
            raise SchemaError("payload.transitions: matrices have different sizes")
        for key in ("initial", "stationary", "alternative_initial"):
            if key in p:
                guard(f"payload.{key}", as_distribution, p[key], n, key)
    elif sc.kind == "channel":
        km = guard("payload.kraus", KrausMap, tuple(p["kraus"]))
        rep = validate(km, t)
        if not rep.passed:
            raise SchemaError(f"payload.kraus: not trace preserving (residual {rep.completeness_residual:.3g})")
        for key in ("state", "sigma"):
            if key in p:
                rho = guard(f"payload.{key}", as_density, p[key], t, key)
                if rho.shape[0] != km.dim:
                    raise SchemaError(f"payload.{key}: dimension {rho.shape[0]} does not match Kraus dimension {km.dim}")
        for k, x in enumerate(p.get("observables", [])):
            h = guard(f"payload.observables[{k}]", hermitian, x, t, f"observable {k}")
            if h.shape[0] != km.dim:
                raise SchemaError(f"payload.observables[{k}]: wrong dimension")
    elif sc.kind == "dual_flow":
        chans = [guard(f"payload.channels[{k}]", KrausMap, tuple(ops)) for k, ops in enumerate(p["channels"])]
        for k, c in enumerate(chans):
            if not validate(c, t).passed:
                raise SchemaError(f"payload.channels[{k}]: not trace preserving")
        for key in ("rho0", "sigma0"):
            guard(f"payload.{key}", ChannelFlow.evolve, p[key], chans, t)
    elif sc.kind == "pathspace":
        fams = [guard(f"payload.families[{k}]", ProjectorFamily, tuple(f)) for k, f in enumerate(p["families"])]
        chans = [guard(f"payload.channels[{k}]", KrausMap, tuple(ops)) for k, ops in enumerate(p["channels"])]
        for k, c in enumerate(chans):
            if not validate(c, t).passed:
                raise SchemaError(f"payload.channels[{k}]: not trace preserving")
        guard("payload", PathSpaceSpec, tuple(fams), tuple(chans), p["initial"])
        if "rho0" in p:
            guard("payload.rho0", as_density, p["rho0"], t, "rho0")


def _format_path(err: jsonschema.ValidationError) -> str:
    out = ""
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from None
    return scenario_from_dict(raw)


_VALIDATOR = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
_PAYLOAD_VALIDATORS = {k: jsonschema.Draft202012Validator(v) for k, v in PAYLOAD_SCHEMAS.items()}


def _check_schema(validator, doc, prefix: str = ""):
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is None:
        return
    where = _format_path(err)
    if prefix:
        where = prefix if where == "<root>" else prefix + (where if where.startswith("[") else f".{where}")
    raise SchemaError(f"{where}: {err.message}")


def scenario_from_dict(raw) -> Scenario:
    _check_schema(_VALIDATOR, raw)
    _check_schema(_PAYLOAD_VALIDATORS[raw["kind"]], raw["payload"], "payload")
    overrides = dict(raw.get("tolerances", {}))
    try:
        tol = default_tolerances().override(**overrides)
    except InputError as exc:
        raise SchemaError(f"tolerances: {exc}") from None
    sc = Scenario(raw["kind"], _decode_payload(raw["kind"], raw["payload"]), tol, raw.get("seed"), overrides)
    _semantic_check(sc)
    return sc


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_bytes().decode("utf-8")
    except FileNotFoundError:
        raise ParseError(f"{p}: no such file") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"{p}: not UTF-8 ({exc.reason} at byte {exc.start})") from None
    return parse_scenario(text, str(p))


# ---------------------------------------------------------------------------
# encoding


def _num(x: float):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def encode_matrix(m, real: bool = False) -> list:
    a = np.asarray(m)
    if real:
        return [[_num(v) for v in row] for row in a.real] if a.ndim == 2 else [_num(v) for v in a.real]
    return [[[_num(v.real), _num(v.imag)] for v in row] for row in np.asarray(a, dtype=complex)]


def scenario_to_dict(sc: Scenario) -> dict:
    payload = {}
    for key, value in sc.payload.items():
        if key in ("kraus", "observables"):
            payload[key] = [encode_matrix(m) for m in value]
        elif key in ("channels", "families"):
            payload[key] = [[encode_matrix(m) for m in ops] for ops in value]
        elif key == "transitions":
            payload[key] = [encode_matrix(m, real=True) for m in value]
        elif key == "steps":
            payload[key] = int(value)
        else:
            payload[key] = encode_matrix(value, real=key in _REAL_FIELDS)
    out = {"kind": sc.kind, "payload": payload}
    if sc.seed is not None:
        out["seed"] = int(sc.seed)
    if sc.tolerance_overrides:
        out["tolerances"] = dict(sorted(sc.tolerance_overrides.items()))
    return out


def dump_scenario(sc: Scenario) -> str:
    """Canonical text: sorted keys, two-space indent, shortest round-trip floats."""
    return json.dumps(scenario_to_dict(sc), sort_keys=True, indent=2) + "\n"


def save_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(dump_scenario(sc), encoding="utf-8")


# ---------------------------------------------------------------------------
# random scenarios


def generate_random_scenario(kind: str, dim: int, steps: int, seed: int) -> Scenario:
    """Deterministic random scenario of the requested kind.

    Channels come from Haar-random isometries, chains from row-normalised
    positive matrices, states from the Hilbert-Schmidt ensemble.
    """
    if kind not in KINDS:
        raise UnsupportedKind(f"unsupported scenario kind {kind!r}; choose from {KINDS}")
    if not 2 <= dim <= 6:
        raise InputError(f"dim must be in [2, 6], got {dim}")
    if not 1 <= steps <= 8:
        raise InputError(f"steps must be in [1, 8], got {steps}")
    rng = np.random.default_rng(seed)

    def chan():
        return randomgen.random_kraus(rng, dim, int(rng.integers(1, 5)))

    if kind == "classical":
        p = randomgen.random_stochastic(rng, dim)
        payload = {
            "transitions": [p] * steps,
            "initial": randomgen.random_distribution(rng, dim),
            "stationary": stationary_distribution(p),
            "alternative_initial": randomgen.random_distribution(rng, dim),
        }
    elif kind == "channel":
        payload = {
            "kraus": chan(),
            "state": randomgen.random_density(rng, dim),
            "sigma": randomgen.random_density(rng, dim),
            "observables": [randomgen.random_hermitian(rng, dim) for _ in range(2)],
        }
    elif kind == "dual_flow":
        payload = {
            "channels": [chan() for _ in range(steps)],
            "rho0": randomgen.random_density(rng, dim),
            "sigma0": randomgen.random_density(rng, dim),
        }
    else:
        fams = [ProjectorFamily.from_basis(randomgen.haar_unitary(rng, dim)).projectors for _ in range(steps + 1)]
        payload = {
            "families": [list(f) for f in fams],
            "channels": [chan() for _ in range(steps)],
            "initial": randomgen.random_density(rng, dim),
            "rho0": randomgen.random_density(rng, dim),
            "eps_grid": np.array([0.05, 0.1, 0.2]),
        }
    sc = Scenario(kind, payload, default_tolerances(), seed)
    # canonicalise through text so the in-memory scenario equals what load() returns
    return parse_scenario(dump_scenario(sc))
