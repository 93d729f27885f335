import json
import subprocess
import sys


from hlwalk.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_roots(capsys):
    code, out = run(capsys, "roots", "--family", "A", "--rank", "1")
    assert code == 0 and out["weyl_order"] == 2 and out["poincare"] == [1, 1]
    _, out = run(capsys, "roots", "--family", "C", "--rank", "2")
    assert out["weyl_order"] == 8
    _, out = run(capsys, "roots", "--cartan", "[[2,-1],[-3,2]]")
    assert len(out["positive_roots"]) == 6


def test_hl_and_lr(capsys):
    _, out = run(capsys, "hl", "--family", "A", "--rank", "1", "--lambda", "[1]")
    assert len(out["terms"]) == 3
    _, out = run(capsys, "hl", "--family", "A", "--rank", "1", "--lambda", "[0]")
    assert out["terms"] == [{"nu": [0], "coeff": [1]}]
    _, out = run(capsys, "lr", "--family", "A", "--rank", "1", "--mu", "[1]", "--nu", "[1]")
    assert [t["coeff"] for t in out["terms"]] == [[1], [1, -1], [1, 1]]


def test_prob(capsys):
    base = ("--family", "A", "--rank", "1", "--q", "2")
    _, out = run(capsys, "prob", "corners", *base, "--lambda", "[1]")
    assert [a["p"] for a in out["support"]] == ["2/3", "1/6", "1/6"]
    _, out = run(capsys, "prob", "product", *base, "--mu", "[1]", "--nu", "[1]")
    assert [(a["coweight"], a["p"]) for a in out["support"]] == [([2], "2/3"), ([1], "1/6"), ([0], "1/6")]
    _, out = run(capsys, "prob", "volume", *base, "--lambda", "[0]")
    assert out["volume"] == "1"
    _, out = run(capsys, "prob", "expectation", *base, "--lambda", "[1]")
    assert out["expected_corner_height"] == "1/2"
    _, out = run(capsys, "prob", "tail", *base, "--lambda", "[1]", "--threshold", "1")
    assert out["tail_mass"] == "1/3"
    code, out = run(capsys, "prob", "g", *base, "--mu", "[1]", "--nu", "[1]", "--lambda", "[0]")
    assert code == 0 and out["g"] == "6"


def test_g_integrality_failure_sets_exit_code(capsys):
    code, out = run(capsys, "prob", "g", "--family", "A", "--rank", "1", "--q", "5/2",
                    "--mu", "[1]", "--nu", "[1]", "--lambda", "[0]")
    assert code == 1 and out["passed"] is False


def test_bad_input(capsys, tmp_path):
    assert main(["hl", "--family", "A", "--rank", "1", "--lambda", "[1.5]"]) == 2
    assert main(["hl", "--family", "A", "--rank", "2", "--lambda", "[1,0]"]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rootSystem": {"family": "A", "rank": 1}, "bogus": 1}))
    assert main(["simulate", "chain", "--config", str(cfg)]) == 2
    capsys.readouterr()


def test_simulate_from_config_is_deterministic(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rootSystem": {"family": "A", "rank": 2}, "q": "2",
                               "stepLaw": [{"cw": [1, 1], "p": "1/2"}, {"cw": [0, 0], "p": "1/2"}],
                               "K": 20, "M": 5, "seed": 42, "epsilon": 0.5}))
    outs = []
    for d in ("a", "b"):
        code, res = run(capsys, "simulate", "discrepancy", "--config", str(cfg), "--out", str(tmp_path / d))
        assert code == 0 and res["discrepancy"]["dominance_failures"] == 0
        outs.append((tmp_path / d / "trajectories.csv").read_bytes())
        json.loads((tmp_path / d / "result.json").read_text())
    assert outs[0] == outs[1]
    header = outs[0].decode().splitlines()[0]
    assert header == "trajectory,k,lambda_1,lambda_2,nu_1,nu_2,h_lambda,h_nu"


def test_simulate_k1(capsys):
    code, out = run(capsys, "simulate", "chain", "--family", "A", "--rank", "1", "--q", "2",
                    "--step", '[{"cw":[1],"p":"1"}]', "--K", "1", "--M", "10")
    assert code == 0 and out["final_lambda"] == [{"coweight": [1], "count": 10}]


def test_simulate_lln(capsys):
    code, out = run(capsys, "simulate", "lln", "--family", "A", "--rank", "1", "--q", "2",
                    "--step", '[{"cw":[1],"p":"1"}]', "--K", "200", "--M", "20", "--seed", "1")
    assert code == 0 and out["report"]["exact_drift"] == ["1/2"]
    assert abs(out["report"]["empirical_drift"][0] - 0.5) < 0.1


def test_oracle(capsys, tmp_path):
    code, out = run(capsys, "oracle", "corners", "--n", "1", "--p", "2", "--N", "12",
                    "--lambda", "[1]", "--samples", "2000", "--seed", "3", "--csv",
                    "--out", str(tmp_path))
    assert code == 0 and out["precision_failures"] == 0
    assert {a["exact"] for a in out["atoms"]} == {"2/3", "1/6"}
    lines = (tmp_path / "samples.csv").read_text().splitlines()
    assert len(lines) == 2001
    _, out = run(capsys, "oracle", "product", "--n", "1", "--p", "2", "--lambda", "[1]",
                 "--mu", "[1]", "--samples", "500")
    assert out["kind"] == "product"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hlwalk", "roots", "--family", "G", "--rank", "2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["weyl_order"] == 12
