import json
import subprocess
import sys

import numpy as np

from ergodic_games.cli import main
from ergodic_games.model import dump_game

from helpers import fixture_path, random_turnbased


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_analyze_three_state(capsys, tmp_path):
    out_json = tmp_path / "report.json"
    code, out = run(capsys, "analyze", fixture_path("three_state"), "--out", out_json)
    assert code == 0
    assert "contraction of rate 3/4" in out
    assert "k_uni = 1" in out and "theta = 1/4" in out
    rep = json.loads(out_json.read_text())
    assert rep["gamma"] == "3/4" and rep["k_uni"] == 1


def test_analyze_positive_transitions(capsys, tmp_path):
    f = tmp_path / "pos.json"
    f.write_text(json.dumps({
        "kind": "concurrent",
        "states": [{"name": "a", "min_actions": ["x"], "max_actions": ["y"]},
                   {"name": "b", "min_actions": ["x"], "max_actions": ["y"]}],
        "payoff": [[[1]], [[2]]],
        "transition": [[[[0.5, 0.5]]], [[[0.25, 0.75]]]],
    }))
    code, out = run(capsys, "analyze", f)
    assert code == 0 and "k_uni = 1" in out


def test_analyze_entropy(capsys):
    code, out = run(capsys, "analyze", fixture_path("entropy_two_cycle"))
    assert code == 0
    assert "rate 0.3333333333" in out


def test_solve_and_verify_three_state(capsys, tmp_path):
    cert, trace = tmp_path / "a.cert", tmp_path / "a.csv"
    code, out = run(capsys, "solve", fixture_path("three_state"), "--epsilon", "1e-6", "--cert", cert, "--trace", trace)
    assert code == 0
    assert "s2 -> to_max_3" in out
    doc = json.loads(cert.read_text())
    lo, hi = doc["value_interval"]
    assert lo <= 3.75 <= hi and hi - lo <= 1e-6
    assert doc["epsilon"] > 0 and doc["theta"] == "1/4"
    assert trace.read_text().startswith("iteration,residual_H,alpha,beta\n")
    code, out = run(capsys, "verify", fixture_path("three_state"), "--cert", cert)
    assert code == 0 and "oracle value: 15/4" in out and "PASS" in out


def test_solve_exact(capsys, tmp_path):
    cert = tmp_path / "x.cert"
    code, out = run(capsys, "solve", fixture_path("three_state"), "--exact", "--cert", cert)
    assert code == 0 and "claimed value: 15/4" in out
    assert json.loads(cert.read_text())["policies"]["claimed_value"] == "15/4"


def test_solve_single_state(capsys):
    code, out = run(capsys, "solve", fixture_path("single_state"))
    assert code == 0 and "terminated after 1 iterations" in out


def test_solve_entropy_two_cycle(capsys, tmp_path):
    cert = tmp_path / "e.cert"
    code, out = run(capsys, "solve", fixture_path("entropy_two_cycle"), "--cert", cert)
    assert code == 0
    lo, hi = json.loads(cert.read_text())["value_interval"]
    assert lo <= 1 <= hi
    code, out = run(capsys, "verify", fixture_path("entropy_two_cycle"), "--cert", cert)
    assert code == 0


def test_corrupted_interval_fails(capsys, tmp_path):
    cert = tmp_path / "a.cert"
    run(capsys, "solve", fixture_path("three_state"), "--cert", cert)
    doc = json.loads(cert.read_text())
    doc["value_interval"] = [3.8, 3.9]
    cert.write_text(json.dumps(doc))
    code, out = run(capsys, "verify", fixture_path("three_state"), "--cert", cert)
    assert code == 3 and "FAIL" in out


def test_certificate_for_other_game_is_rejected(capsys, tmp_path):
    cert = tmp_path / "a.cert"
    run(capsys, "solve", fixture_path("three_state"), "--cert", cert)
    code, _ = run(capsys, "verify", fixture_path("single_state"), "--cert", cert)
    assert code == 1


def test_non_termination_exit_code(capsys, tmp_path):
    cert = tmp_path / "m.cert"
    code, out = run(capsys, "solve", fixture_path("multichain"), "--max-iters", "200", "--cert", cert)
    assert code == 2 and "no certificate written" in out
    assert not cert.exists()


def test_input_errors(capsys, tmp_path):
    assert main(["solve", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "turnbased", "states": []}')
    assert main(["analyze", str(bad)]) == 1
    assert main(["solve", fixture_path("three_state"), "--epsilon", "1e-6", "--eta", "1e-3"]) == 1


def test_cap_exit_code(capsys, tmp_path, monkeypatch):
    cert = tmp_path / "a.cert"
    run(capsys, "solve", fixture_path("three_state"), "--cert", cert)
    monkeypatch.setenv("ERGODIC_GAMES_POLICY_CAP", "2")
    code, out = run(capsys, "verify", fixture_path("three_state"), "--cert", cert)
    assert code == 4 and "unverifiable at desk scale" in out


def test_deterministic_output(capsys, tmp_path):
    a, b = tmp_path / "a.cert", tmp_path / "b.cert"
    _, out1 = run(capsys, "solve", fixture_path("three_state"), "--cert", a)
    _, out2 = run(capsys, "solve", fixture_path("three_state"), "--cert", b)
    assert out1 == out2 and a.read_bytes() == b.read_bytes()


def test_random_instances_verify(capsys, tmp_path):
    rng = np.random.default_rng(23)
    for i in range(100):
        game = tmp_path / f"g{i}.json"
        game.write_text(dump_game(random_turnbased(rng)))
        cert = tmp_path / f"g{i}.cert"
        assert main(["solve", str(game), "--cert", str(cert)]) == 0
        assert main(["verify", str(game), "--cert", str(cert)]) == 0
    capsys.readouterr()


def test_console_script_module_entry():
    res = subprocess.run([sys.executable, "-m", "ergodic_games.cli", "analyze", fixture_path("three_state")],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "contraction of rate 3/4" in res.stdout
