import json
import subprocess
import sys

import numpy as np
import pytest

from chronoreverse import channels as qc
from chronoreverse.cli import main, run_command
from chronoreverse.errors import KindMismatch, ParseError, SchemaError, UnsupportedKind
from chronoreverse.scenario import (
    KINDS,
    dump_scenario,
    encode_matrix,
    generate_random_scenario,
    load_scenario,
    parse_scenario,
    save_scenario,
)


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
    return p


def _amplitude_damping_file(tmp_path):
    m = qc.amplitude_damping(0.5)
    return _write(tmp_path, "ad.json", {
        "kind": "channel",
        "payload": {"kraus": [encode_matrix(k) for k in m.operators], "state": [[0.5, 0], [0, 0.5]]},
    })


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_minimal_classical_scenario(tmp_path):
    p = _write(tmp_path, "c.json", {"kind": "classical",
                                    "payload": {"transitions": [[[0.9, 0.1], [0.2, 0.8]]], "initial": [1, 0]}})
    sc = load_scenario(p)
    assert sc.kind == "classical"
    assert len(sc.payload["transitions"]) == 1
    assert np.allclose(sc.payload["initial"], [1.0, 0.0])


def test_amplitude_damping_scenario_validates(tmp_path):
    sc = load_scenario(_amplitude_damping_file(tmp_path))
    rep = qc.validate(sc.kraus_map())
    assert rep.kind == qc.TRACE_PRESERVING and rep.passed


def test_row_sum_schema_error(tmp_path):
    p = _write(tmp_path, "c.json", {"kind": "classical", "payload": {
        "transitions": [[[1, 0, 0], [0, 1, 0], [0.5, 0.47, 0]]], "initial": [1, 0, 0]}})
    with pytest.raises(SchemaError, match="row 2 of P\\(0\\) sums to 0.97"):
        load_scenario(p)


def test_non_hermitian_state_names_entries(tmp_path):
    m = qc.amplitude_damping(0.5)
    p = _write(tmp_path, "c.json", {"kind": "channel", "payload": {
        "kraus": [encode_matrix(k) for k in m.operators], "state": [[0.5, 0.1], [0, 0.5]]}})
    with pytest.raises(SchemaError, match=r"payload.state.*\(0,1\) and \(1,0\)"):
        load_scenario(p)


def test_parse_error_has_location(tmp_path):
    p = _write(tmp_path, "bad.json", '{"kind": "channel",\n "payload": {]}')
    with pytest.raises(ParseError, match="line 2"):
        load_scenario(p)
    with pytest.raises(ParseError):
        load_scenario(tmp_path / "missing.json")
    bad = tmp_path / "latin1.json"
    bad.write_bytes(b'{"kind": "\xe9"}')
    with pytest.raises(ParseError, match="UTF-8"):
        load_scenario(bad)


def test_nan_rejected():
    with pytest.raises(ParseError):
        parse_scenario('{"kind": "classical", "payload": {"transitions": [[[NaN]]], "initial": [1]}}')


def test_schema_error_names_field():
    with pytest.raises(SchemaError, match="payload"):
        parse_scenario('{"kind": "classical", "payload": {"initial": [1]}}')
    with pytest.raises(SchemaError, match="kind"):
        parse_scenario('{"kind": "quantum", "payload": {}}')


@pytest.mark.parametrize("kind", KINDS)
def test_round_trip_is_byte_identical(kind, tmp_path):
    for seed in range(3):
        sc = generate_random_scenario(kind, 3, 2, seed)
        p = tmp_path / f"{kind}{seed}.json"
        save_scenario(sc, p)
        text = p.read_bytes()
        save_scenario(load_scenario(p), p)
        assert p.read_bytes() == text


def test_generation_is_deterministic():
    a = dump_scenario(generate_random_scenario("classical", 3, 4, 7))
    b = dump_scenario(generate_random_scenario("classical", 3, 4, 7))
    assert a == b
    assert a != dump_scenario(generate_random_scenario("classical", 3, 4, 8))


def test_generated_channel_completeness():
    sc = generate_random_scenario("channel", 2, 1, 1)
    assert qc.validate(sc.kraus_map()).completeness_residual <= 1e-12


def test_generated_dual_flow_is_consistent():
    sc = generate_random_scenario("dual_flow", 2, 3, 2)
    flow = qc.ChannelFlow.evolve(sc.payload["rho0"], sc.channel_sequence())
    assert flow.steps == 3 and flow.consistency_residual() <= 1e-12


def test_generate_rejects_unknown_kind():
    with pytest.raises(UnsupportedKind):
        generate_random_scenario("ladder", 2, 1, 0)


def _mutations(rng, text):
    """Random syntactic and semantic corruptions of a scenario text."""
    raw = json.loads(text)
    choice = int(rng.integers(0, 6))
    if choice == 0:
        k = int(rng.integers(0, len(text)))
        return text[:k] + text[k + 1:]
    if choice == 1:
        k = int(rng.integers(0, len(text)))
        return text[:k] + rng.choice(list('{}[],:"x0-e')) + text[k:]
    if choice == 2:
        key = str(rng.choice(sorted(raw["payload"])))
        junk = ["text", None, 3, [], [[1, 2], [3]], {"a": 1}, [[[1, 2, 3]]]]
        raw["payload"][key] = junk[int(rng.integers(0, len(junk)))]
        return json.dumps(raw)
    if choice == 3:
        key = str(rng.choice(sorted(raw["payload"])))
        del raw["payload"][key]
        return json.dumps(raw)
    if choice == 4:
        # scale a number so some invariant breaks
        s = json.dumps(raw)
        pos = [i for i, c in enumerate(s) if c.isdigit()]
        k = int(rng.choice(pos))
        return s[:k] + "7" + s[k + 1:]
    raw["kind"] = str(rng.choice([k for k in KINDS if k != raw["kind"]]))
    return json.dumps(raw)


def test_fuzzed_files_fail_cleanly():
    rng = np.random.default_rng(70)
    outcomes = {"ok": 0, "rejected": 0}
    bases = [dump_scenario(generate_random_scenario(kind, 2, 1, seed)) for kind in KINDS for seed in range(3)]
    for trial in range(1000):
        text = bases[trial % len(bases)]
        bad = _mutations(rng, text)
        try:
            parse_scenario(bad)
            outcomes["ok"] += 1
        except (ParseError, SchemaError):
            outcomes["rejected"] += 1
    assert outcomes["rejected"] > 500


def test_reverse_channel_on_amplitude_damping(tmp_path, capsys):
    code, out, _ = _run(["reverse-channel", "--scenario", str(_amplitude_damping_file(tmp_path))], capsys)
    report = json.loads(out)
    assert code == 0 and report["passed"]
    s0, s1 = (np.array([[complex(*e) for e in row] for row in k]) for k in report["quantities"]["reversal_kraus"])
    assert np.allclose(s0, np.diag([np.sqrt(2 / 3), 1.0]))
    assert np.allclose(s1, [[0, 0], [1 / np.sqrt(3), 0]])
    rec = next(v for v in report["verdicts"] if v["name"] == "recovery_residual")
    assert rec["value"] <= 1e-9 and rec["tolerance"] == 1e-9
    assert report["units"] == "nats"


def test_h_theorem_on_dual_flow_with_stationary_sigma(tmp_path, capsys):
    # a mixed-unitary qubit channel keeps I/2 fixed
    rng = np.random.default_rng(71)
    from chronoreverse.randomgen import haar_unitary, random_density

    ops = [np.sqrt(0.6) * haar_unitary(rng, 2), np.sqrt(0.4) * haar_unitary(rng, 2)]
    chan = [encode_matrix(k) for k in ops]
    p = _write(tmp_path, "d.json", {"kind": "dual_flow", "payload": {
        "channels": [chan] * 4, "rho0": encode_matrix(random_density(rng, 2)), "sigma0": [[0.5, 0], [0, 0.5]]}})
    code, out, _ = _run(["h-theorem", "--scenario", str(p)], capsys)
    report = json.loads(out)
    assert code == 0
    seq = report["quantities"]["belavkin_staszewski"]
    assert len(seq) == 5 and all(b <= a + 1e-9 for a, b in zip(seq, seq[1:]))


@pytest.mark.parametrize("command,kind", [
    ("reverse-chain", "classical"), ("check-adjointness", "classical"), ("h-theorem", "classical"),
    ("check-adjointness", "channel"), ("entropies", "channel"), ("jensen", "channel"),
    ("entropies", "dual_flow"), ("path-weights", "pathspace"), ("verify-max-entropy", "pathspace"),
])
def test_commands_pass_on_generated_scenarios(command, kind, tmp_path, capsys):
    p = tmp_path / "s.json"
    save_scenario(generate_random_scenario(kind, 2, 2, 5), p)
    out_file = tmp_path / "report.json"
    code, out, _ = _run([command, "--scenario", str(p), "--out", str(out_file)], capsys)
    assert code == 0
    assert out_file.read_text() == out
    report = json.loads(out)
    assert all("tolerance" in v for v in report["verdicts"])
    assert report["provenance"]["seed"] == 5


def test_reports_are_deterministic(tmp_path, capsys):
    p = tmp_path / "s.json"
    save_scenario(generate_random_scenario("classical", 3, 2, 1), p)
    a = _run(["check-adjointness", "--scenario", str(p), "--seed", "9"], capsys)[1]
    b = _run(["check-adjointness", "--scenario", str(p), "--seed", "9"], capsys)[1]
    assert a == b


def test_property_suite_deterministic(capsys):
    a = _run(["property-suite", "--seed", "42", "--scale", "0.02"], capsys)
    b = _run(["property-suite", "--seed", "42", "--scale", "0.02"], capsys)
    assert a[0] == 0 and a[1] == b[1]
    props = json.loads(a[1])["quantities"]["properties"]
    assert {p["name"].split(".")[0] for p in props} >= {"kernel", "classical", "quantum", "harmonic", "jensen",
                                                        "entropy", "path", "embedding"}


def test_exit_codes(tmp_path, capsys):
    ad = str(_amplitude_damping_file(tmp_path))
    # kind mismatch is an input error
    assert _run(["reverse-chain", "--scenario", ad], capsys)[0] == 2
    assert _run(["reverse-channel", "--scenario", str(tmp_path / "nope.json")], capsys)[0] == 2
    # a failing verdict: a tolerance of zero cannot be met by rounding residuals
    tol = _write(tmp_path, "tol.json", {"check": 0.0})
    sc = tmp_path / "c.json"
    save_scenario(generate_random_scenario("channel", 4, 1, 0), sc)
    code, out, _ = _run(["reverse-channel", "--scenario", str(sc), "--tol-override", str(tol)], capsys)
    assert code == 1 and not json.loads(out)["passed"]
    # singular sigma is a numerical failure
    m = qc.amplitude_damping(0.5)
    p = _write(tmp_path, "sing.json", {"kind": "dual_flow", "payload": {
        "channels": [[encode_matrix(k) for k in m.operators]], "rho0": [[0.5, 0], [0, 0.5]],
        "sigma0": [[1, 0], [0, 0]]}})
    code, _, err = _run(["h-theorem", "--scenario", str(p)], capsys)
    assert code == 3 and "SingularState" in err


def test_run_command_kind_mismatch():
    with pytest.raises(KindMismatch):
        run_command("jensen", generate_random_scenario("classical", 2, 1, 0))


def test_env_tolerance_reaches_report(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CHRONO_REVERSE_TOL", "1e-7")
    code, out, _ = _run(["reverse-channel", "--scenario", str(_amplitude_damping_file(tmp_path))], capsys)
    assert json.loads(out)["tolerances"]["check"] == 1e-7


def test_console_entry_point(tmp_path):
    out = tmp_path / "g.json"
    r = subprocess.run([sys.executable, "-m", "chronoreverse.cli", "generate", "--kind", "channel", "--dim", "2",
                        "--seed", "1", "--out", str(out)], capture_output=True, text=True)
    assert r.returncode == 0
    assert load_scenario(out).kind == "channel"
