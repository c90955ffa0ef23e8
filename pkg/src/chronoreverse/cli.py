"""Command-line entry points.

Every analysis command reads a scenario file and writes a JSON report to
standard output (and optionally to ``--out``). Exit status: 0 when every
verdict passes, 1 when some verdict fails, 2 on bad input, 3 when a numerical
precondition fails during computation.
"""

from __future__ import annotations

import argparse
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import channels as qc
from . import classical as cl
from . import harmonic as hm
from . import pathspace as ps
from . import suite
from .errors import ChronoError, InputError, KindMismatch, ParseError, SchemaError
from .linalg import Tolerances, op_norm, rank_psd, support_projector
from .randomgen import random_hermitian, random_positive_definite
from .scenario import KINDS, Scenario, encode_matrix, generate_random_scenario, load_scenario, save_scenario

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3

# command -> scenario kinds it accepts
COMMAND_KINDS = {
    "reverse-chain": ("classical",),
    "reverse-channel": ("channel",),
    "check-adjointness": ("classical", "channel"),
    "h-theorem": ("classical", "dual_flow"),
    "entropies": ("channel", "dual_flow"),
    "jensen": ("channel",),
    "path-weights": ("pathspace",),
    "verify-max-entropy": ("pathspace",),
    "property-suite": KINDS,
}


def _json_value(x):
    """Floats for JSON; non-finite values become strings."""
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    if isinstance(x, np.ndarray):
        return _json_value(x.tolist())
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


class ReportBuilder:
    def __init__(self, tol: Tolerances):
        self.tol = tol
        self.quantities: dict = {}
        self.verdicts: list = []

    def put(self, name: str, value):
        self.quantities[name] = value

    def upper(self, name: str, value: float, tolerance: float | None = None):
        """Verdict ``value <= tolerance``."""
        tolerance = self.tol.check if tolerance is None else tolerance
        self.verdicts.append({"name": name, "passed": bool(value <= tolerance), "value": value,
                              "relation": "<=", "tolerance": tolerance})

    def lower(self, name: str, value: float, tolerance: float | None = None):
        """Verdict ``value >= -tolerance``."""
        tolerance = self.tol.check if tolerance is None else tolerance
        self.verdicts.append({"name": name, "passed": bool(value >= -tolerance), "value": value,
                              "relation": ">=", "tolerance": -tolerance})

    def flag(self, name: str, passed: bool, value=None, tolerance: float | None = None):
        tolerance = self.tol.check if tolerance is None else tolerance
        self.verdicts.append({"name": name, "passed": bool(passed), "value": value,
                              "relation": "flag", "tolerance": tolerance})


# ---------------------------------------------------------------------------
# commands


def _reverse_chain(sc: Scenario, rb: ReportBuilder, rng):
    flow = sc.chain_flow()
    qs = flow.reverse_transitions()
    rb.put("distributions", flow.distributions)
    rb.put("reverse_transitions", qs)
    bayes, rows = 0.0, 0.0
    for t, (p, q) in enumerate(zip(flow.transitions, qs)):
        nxt = flow.distributions[t + 1]
        live = nxt > 0
        diff = np.abs(p * flow.distributions[t][:, None] - (q * nxt[:, None]).T)[:, live]
        if diff.size:
            bayes = max(bayes, float(diff.max()))
        rows = max(rows, float(np.max(np.abs(q.sum(axis=1) - 1.0))), -float(min(q.min(), 0.0)))
    rb.upper("bayes_consistency", bayes, 1e-10)
    rb.upper("reverse_row_stochastic", rows, 1e-12)
    rb.upper("flow_consistency", flow.consistency_residual())


def _reverse_channel(sc: Scenario, rb: ReportBuilder, rng):
    t = rb.tol
    m = sc.kraus_map()
    rho = sc.payload["state"]
    rev = qc.time_reversal(m, rho, t)
    nxt = qc.apply_schrodinger(m, rho, t)
    rb.put("evolved_state", encode_matrix(nxt))
    rb.put("reversal_kraus", [encode_matrix(k) for k in rev.operators])
    rb.put("reversal_kind", rev.kind)
    rb.put("reversal_completeness", encode_matrix(rev.completeness()))
    rb.upper("recovery_residual", qc.recovery_residual(m, rho, t))
    rb.upper("completeness_is_support_projector", op_norm(rev.completeness() - support_projector(nxt, t)))
    if rank_psd(rho, t) == rho.shape[0]:
        rb.upper("double_reversal_residual", qc.double_reversal_residual(m, rho, t))
    if rev.kind != qc.TRACE_PRESERVING:
        aug = qc.augment_to_tpcp(rev, nxt, t)
        rb.put("augmented_kraus", [encode_matrix(k) for k in aug.operators])
        rb.upper("augmented_completeness_residual", qc.validate(aug, t).completeness_residual)
    if "sigma" in sc.payload:
        rb.upper("consistency_residual", qc.check_consistency(m, rho, sc.payload["sigma"], t))
    f, b = qc.measurement_probability_reversal(m, rho, t)
    rb.put("measurement_probabilities", {"forward": f, "reverse": b})
    rb.upper("measurement_probability_reversal", float(np.max(np.abs(f - b))))


def _check_adjointness(sc: Scenario, rb: ReportBuilder, rng):
    t = rb.tol
    if sc.kind == "classical":
        flow = sc.chain_flow()
        shape = (flow.steps + 1, flow.n)
        f, g = rng.standard_normal(shape), rng.standard_normal(shape)
        rb.put("f", f)
        rb.put("g", g)
        rb.upper("space_time_adjointness", cl.check_space_time_adjointness(flow, f, g))
        rb.upper("integration_by_parts", cl.integration_by_parts_residual(flow, f, g))
        return
    m = sc.kraus_map()
    rho = sc.payload["state"]
    obs = sc.payload.get("observables") or [random_hermitian(rng, m.dim) for _ in range(2)]
    x, y = obs[0], obs[1 % len(obs)]
    rb.upper("space_time_adjointness", qc.check_space_time_adjointness_q(m, rho, x, y, t))
    rb.upper("support_lemma", qc.lemma_support_residual(m, rho, y, t))


def _h_theorem(sc: Scenario, rb: ReportBuilder, rng):
    t = rb.tol
    if sc.kind == "classical":
        p = sc.payload["transitions"][0]
        if any(not np.array_equal(p, q) for q in sc.payload["transitions"]):
            raise InputError("the classical H-theorem needs a homogeneous chain")
        if "stationary" not in sc.payload:
            raise SchemaError("payload.stationary: required for h-theorem")
        steps = sc.payload.get("steps", len(sc.payload["transitions"]))
        seq = cl.classical_h_theorem_report(p, sc.payload["initial"], sc.payload["stationary"], steps, t.check)
        rb.put("kl_sequence", seq)
        rb.upper("kl_nonincreasing", float(np.max(np.diff(seq))) if len(seq) > 1 else 0.0)
        return
    dual = _dual(sc, t)
    e = hm.h_theorem_trace_check(dual, t)
    rb.put("belavkin_staszewski", e.belavkin_staszewski)
    rb.put("umegaki", e.umegaki)
    rb.upper("belavkin_staszewski_nonincreasing", e.bs_worst_increase())
    rb.upper("umegaki_nonincreasing", e.umegaki_worst_increase())
    rb.lower("bs_at_least_umegaki", e.worst_ordering_gap())
    ops = hm.h_theorem_operator_check(dual, t)
    rb.put("operator_subharmonic_min_eigenvalues", ops)
    rb.lower("operator_subharmonic", min(ops))


def _dual(sc: Scenario, t: Tolerances) -> hm.DualChannelFlow:
    return hm.DualChannelFlow.evolve(sc.payload["rho0"], sc.payload["sigma0"], sc.channel_sequence(), t)


def _entropies(sc: Scenario, rb: ReportBuilder, rng):
    t = rb.tol
    if sc.kind == "dual_flow":
        dual = _dual(sc, t)
        rhos, sigmas = dual.rho.states, dual.sigma.states
    else:
        if "sigma" not in sc.payload:
            raise SchemaError("payload.sigma: required for entropies")
        m = sc.kraus_map()
        rhos = [sc.payload["state"], qc.apply_schrodinger(m, sc.payload["state"], t)]
        sigmas = [sc.payload["sigma"], qc.apply_schrodinger(m, sc.payload["sigma"], t)]
    du = [hm.d_umegaki(r, s, t) for r, s in zip(rhos, sigmas)]
    dbs = [hm.d_belavkin_staszewski(r, s, t) for r, s in zip(rhos, sigmas)]
    rb.put("umegaki", du)
    rb.put("belavkin_staszewski", dbs)
    finite = [(a, b) for a, b in zip(dbs, du) if math.isfinite(a) and math.isfinite(b)]
    rb.lower("bs_at_least_umegaki", min((a - b for a, b in finite), default=0.0))
    rb.lower("umegaki_nonnegative", min(du))
    rb.upper("umegaki_nonincreasing", float(np.max(np.diff(du))) if all(map(math.isfinite, du)) else 0.0)
    rb.upper("belavkin_staszewski_nonincreasing",
             float(np.max(np.diff(dbs))) if all(map(math.isfinite, dbs)) else 0.0)


def _jensen(sc: Scenario, rb: ReportBuilder, rng):
    t = rb.tol
    m = sc.kraus_map()
    rho = sc.payload["state"]
    ops = list(m.operators)
    out = {}
    for name, sf in hm.FUNCTIONS.items():
        if sf.domain.lo == -np.inf:
            xs = [random_hermitian(rng, m.dim) for _ in ops]
        else:
            xs = [random_positive_definite(rng, m.dim) for _ in ops]
        row = {
            "trace": hm.trace_jensen_residual(name, ops, xs, t),
            "expectation": hm.expectation_jensen_residual(name, rho, xs[0], t),
        }
        if sf.operator_convex:
            row["operator"] = hm.operator_jensen_residual(name, ops, xs, t)
            rb.lower(f"operator_jensen.{name}", row["operator"])
        rb.lower(f"trace_jensen.{name}", row["trace"])
        rb.lower(f"expectation_jensen.{name}", row["expectation"])
        out[name] = row
    rb.put("residuals", out)


def _path_weights(sc: Scenario, rb: ReportBuilder, rng):
    spec = sc.path_spec()
    w = ps.path_weights(spec)
    rb.put("shape", list(spec.shape))
    rb.put("weights", w.weights)
    rb.put("marginals", [w.marginal(k) for k in range(spec.steps + 1)])
    rb.upper("total_mass", abs(w.total() - 1.0))


def _verify_max_entropy(sc: Scenario, rb: ReportBuilder, rng):
    t = rb.tol
    if "rho0" not in sc.payload:
        raise SchemaError("payload.rho0: required for verify-max-entropy")
    spec = sc.path_spec()
    if spec.steps == 0:
        raise InputError("verify-max-entropy needs at least one channel")
    grid = tuple(float(e) for e in sc.payload.get("eps_grid", (0.05, 0.1, 0.2)))
    rep = ps.verify_max_entropy_theorem(spec, sc.payload["rho0"], ps.perturbation_grid(spec.channels, grid), t)
    rb.put("d_star", rep.d_star)
    rb.put("d_perturbed", rep.d_perturbed)
    rb.put("eps_grid", list(grid))
    rb.put("d_umegaki_initial", rep.d_umegaki_initial)
    rb.put("nondegenerate_initial_family", rep.nondegenerate_initial_family)
    rb.put("note", rep.note)
    rb.flag("d_star_minimal", rep.minimal, min(rep.d_perturbed) - rep.d_star if rep.d_perturbed else None)
    rb.flag("d_star_bounded_by_umegaki", rep.bounded, rep.d_umegaki_initial - rep.d_star)


def _property_suite(sc: Scenario | None, rb: ReportBuilder, rng, seed: int, scale: float):
    results = suite.run_all(seed, scale, rb.tol)
    rb.put("properties", [r.as_dict() for r in results])
    for r in results:
        rb.flag(r.name, r.ok, r.worst, r.tolerance)


HANDLERS = {
    "reverse-chain": _reverse_chain,
    "reverse-channel": _reverse_channel,
    "check-adjointness": _check_adjointness,
    "h-theorem": _h_theorem,
    "entropies": _entropies,
    "jensen": _jensen,
    "path-weights": _path_weights,
    "verify-max-entropy": _verify_max_entropy,
}


def run_command(command: str, scenario: Scenario | None, flags: dict | None = None) -> dict:
    """Run one analysis command and return the report as a JSON-ready dict.

    ``flags`` may carry ``seed`` (overrides the scenario seed), ``tolerances``
    (a dict of overrides applied on top of the scenario's) and, for the
    property suite, ``scale``.
    """
    flags = dict(flags or {})
    if command not in COMMAND_KINDS:
        raise InputError(f"unknown command {command!r}")
    if scenario is None and command != "property-suite":
        raise InputError(f"{command} needs a scenario")
    if scenario is not None and scenario.kind not in COMMAND_KINDS[command]:
        raise KindMismatch(f"{command} expects a scenario of kind {' or '.join(COMMAND_KINDS[command])}, "
                           f"got {scenario.kind}")
    tol = scenario.tolerances if scenario is not None else Tolerances()
    if flags.get("tolerances"):
        try:
            tol = tol.override(**flags["tolerances"])
        except TypeError as exc:
            raise SchemaError(f"tolerance override: {exc}") from None
    seed = flags.get("seed")
    if seed is None:
        seed = scenario.seed if scenario is not None and scenario.seed is not None else 0
    rng = np.random.default_rng(seed)
    rb = ReportBuilder(tol)
    if command == "property-suite":
        _property_suite(scenario, rb, rng, seed, float(flags.get("scale", 1.0)))
    else:
        HANDLERS[command](scenario, rb, rng)
    return _json_value({
        "command": command,
        "scenario": scenario.summary() if scenario is not None else None,
        "units": "nats",
        "quantities": _encode_quantities(rb.quantities),
        "verdicts": rb.verdicts,
        "passed": all(v["passed"] for v in rb.verdicts),
        "tolerances": tol.as_dict(),
        "provenance": {
            "seed": seed,
            "chronoreverse": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    })


def _encode_quantities(q: dict) -> dict:
    out = {}
    for k, v in q.items():
        if isinstance(v, np.ndarray) and np.iscomplexobj(v):
            v = encode_matrix(v)
        elif isinstance(v, list) and v and isinstance(v[0], np.ndarray) and np.iscomplexobj(v[0]):
            v = [encode_matrix(m) for m in v]
        out[k] = v
    return out


def report_text(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# argument parsing


def _load_overrides(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    known = set(Tolerances().as_dict())
    if not isinstance(raw, dict) or not set(raw) <= known:
        raise SchemaError(f"{path}: expected an object with keys from {sorted(known)}")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw.values()):
        raise SchemaError(f"{path}: tolerance values must be numbers")
    return raw


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chronoreverse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMAND_KINDS:
        p = sub.add_parser(name, help=f"scenario kinds: {', '.join(COMMAND_KINDS[name])}")
        p.add_argument("--scenario", required=name != "property-suite", help="scenario JSON file")
        p.add_argument("--seed", type=int, help="overrides the scenario seed")
        p.add_argument("--tol-override", help="JSON file with tolerance overrides")
        p.add_argument("--out", help="also write the report here")
        if name == "property-suite":
            p.add_argument("--scale", type=float, default=1.0, help="multiplier on the default trial counts")
    g = sub.add_parser("generate", help="write a random scenario")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--steps", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output file (default: standard output)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            from .scenario import dump_scenario

            sc = generate_random_scenario(args.kind, args.dim, args.steps, args.seed)
            if args.out:
                save_scenario(sc, args.out)
            else:
                sys.stdout.write(dump_scenario(sc))
            return EXIT_PASS
        flags = {"seed": args.seed}
        if args.tol_override:
            flags["tolerances"] = _load_overrides(args.tol_override)
        if args.command == "property-suite":
            flags["scale"] = args.scale
        sc = load_scenario(args.scenario) if args.scenario else None
        report = run_command(args.command, sc, flags)
    except InputError as exc:
        print(f"input error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ChronoError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = report_text(report)
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_PASS if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
