import os

import pytest

from kshotlab import build_chain, grid_prime, load_schedule, save_network
from kshotlab.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def chain3(tmp_path):
    path = tmp_path / "chain3.txt"
    save_network(build_chain([1, 2, 3]), path)
    return str(path)


@pytest.fixture
def singleton(tmp_path):
    path = tmp_path / "one.txt"
    save_network(build_chain([1]), path)
    return str(path)


def test_simulate_singleton(capsys, singleton):
    code, out, _ = run_cli(capsys, "simulate", "--graph", singleton, "--k", "1")
    assert code == 0
    assert ",0," in out  # steps=0


def test_simulate_chain_round_robin(capsys, chain3, tmp_path):
    trace_path = str(tmp_path / "trace.txt")
    code, out, _ = run_cli(capsys, "simulate", "--graph", chain3,
                           "--schedule", "round_robin", "--k", "1", "--out", trace_path)
    assert code == 0
    steps = int(out.strip().splitlines()[-1].split(",")[4])
    assert steps <= 2 * grid_prime(3) ** 2


def test_simulate_identical_bytes_on_rerun(capsys, chain3, tmp_path):
    p1, p2 = str(tmp_path / "t1.txt"), str(tmp_path / "t2.txt")
    run_cli(capsys, "simulate", "--graph", chain3, "--schedule", "oblivious_kshot",
            "--k", "3", "--out", p1)
    run_cli(capsys, "simulate", "--graph", chain3, "--schedule", "oblivious_kshot",
            "--k", "3", "--out", p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_simulate_policy(capsys, chain3):
    code, out, _ = run_cli(capsys, "simulate", "--graph", chain3,
                           "--policy", "rr-echo", "--k", "1")
    assert code == 0


def test_adversary_oblivious(capsys, tmp_path):
    g, c = str(tmp_path / "g.txt"), str(tmp_path / "c.txt")
    code, out, _ = run_cli(capsys, "adversary", "--kind", "oblivious", "--n", "12",
                           "--k", "3", "--out-graph", g, "--out-cert", c)
    assert code == 0 and "replay PASS" in out
    claimed = int(out.split("claimed_delay=")[1].split()[0])
    assert claimed >= 19
    cert_text = open(c).read()
    assert "claimed_delay=" in cert_text and "segment j=0" in cert_text
    assert os.path.exists(g)


def test_adversary_adaptive(capsys, tmp_path):
    c = str(tmp_path / "cert.txt")
    code, out, _ = run_cli(capsys, "adversary", "--kind", "adaptive", "--n", "10",
                           "--k", "1", "--policy", "rr-echo", "--out-cert", c)
    assert code == 0 and "replay PASS" in out
    body = open(c).read()
    assert body.startswith("layer i=2 pair=")


def test_adversary_1shot_chain(capsys):
    code, out, _ = run_cli(capsys, "adversary", "--kind", "1shot-chain", "--n", "10",
                           "--policy", "rr-echo")
    assert code == 0 and "replay PASS" in out
    claimed = int(out.split("claimed_delay=")[1].split()[0])
    assert claimed >= 44


def test_adversary_broken_policy_diagnostic(capsys):
    code, out, _ = run_cli(capsys, "adversary", "--kind", "adaptive", "--n", "8",
                           "--k", "1", "--policy", "never-transmit")
    assert code == 1
    assert "FINDING PolicyNeverSeparates" in out


def test_sweep_row_count_and_determinism(capsys, tmp_path):
    out1, out2 = str(tmp_path / "s1.csv"), str(tmp_path / "s2.csv")
    args = ["sweep", "--n", "9,16", "--k", "3", "--graphs",
            "random:3,chains:2,adversarial:1", "--seed", "77", "--out"]
    code, _, _ = run_cli(capsys, *args, out1)
    assert code == 0
    code, _, _ = run_cli(capsys, *args, out2)
    assert code == 0
    b1, b2 = open(out1, "rb").read(), open(out2, "rb").read()
    assert b1 == b2
    rows = [l for l in b1.decode().splitlines() if l and not l.startswith(("#", "n,"))]
    assert len(rows) == 2 * 1 * 6  # |n| * |k| * corpus


def test_sweep_parallel_matches_serial(capsys, tmp_path):
    serial, parallel = str(tmp_path / "ser.csv"), str(tmp_path / "par.csv")
    args = ["sweep", "--n", "9,16", "--k", "3,4", "--graphs", "random:2,adversarial:1",
            "--seed", "5", "--out"]
    run_cli(capsys, *args, serial)
    run_cli(capsys, *args, parallel, "--jobs", "2")
    assert open(serial, "rb").read() == open(parallel, "rb").read()


def test_sweep_empty_corpus(capsys, tmp_path):
    out = str(tmp_path / "empty.csv")
    code, _, _ = run_cli(capsys, "sweep", "--n", "9", "--k", "3", "--graphs",
                         "random:0", "--out", out)
    assert code == 0
    lines = open(out).read().splitlines()
    assert lines[1] == "n,k,protocol,graph_id,steps,max_shots,peak_active,flags"
    assert len(lines) == 2  # header comment + column header only


def test_sweep_same_regime_past_sqrt_n():
    # raising the budget beyond sqrt(n) stops helping: completion times for
    # k = ceil(sqrt(n)) and 2*ceil(sqrt(n)) stay within a small factor
    from kshotlab.cli import SweepConfig, run_sweep

    n = 49
    worst = {}
    for k in (7, 14):
        config = SweepConfig((n,), (k,), "oblivious_kshot",
                             (("random", 6), ("chains", 2)), seed=1000,
                             horizon=None, out="")
        records, _, failed = run_sweep(config)
        assert not failed
        worst[k] = max(r.steps for r in records)
    ratio = worst[7] / worst[14]
    assert 1 / 2.5 <= ratio <= 2.5, worst


def test_verify_geometry(capsys):
    code, out, _ = run_cli(capsys, "verify", "geometry", "--p", "5")
    assert code == 0 and out.count("PASS") == 6
    code, _, err = run_cli(capsys, "verify", "geometry", "--p", "6")
    assert code == 2  # composite grid rejected


def test_verify_validity(capsys):
    code, out, _ = run_cli(capsys, "verify", "validity", "--n", "25", "--k", "3")
    assert code == 0 and "PASS validity" in out


def test_verify_budgets(capsys, chain3, tmp_path):
    trace = str(tmp_path / "t.txt")
    run_cli(capsys, "simulate", "--graph", chain3, "--schedule", "round_robin",
            "--k", "2", "--out", trace)
    code, out, _ = run_cli(capsys, "verify", "budgets", "--trace", trace, "--k", "2")
    assert code == 0 and "PASS budgets" in out
    code, out, _ = run_cli(capsys, "verify", "budgets", "--trace", trace, "--k", "0")
    assert code == 1 and "FAIL budgets" in out


def test_schedule_emit_and_load(capsys, tmp_path):
    out = str(tmp_path / "sched.txt")
    code, _, _ = run_cli(capsys, "schedule", "--kind", "oblivious_kshot", "--n", "25",
                         "--k", "3", "--out", out)
    assert code == 0
    assert len(open(out).read().splitlines()) == 1 + 180  # header + one period
    sched = load_schedule(out)
    assert sched.period == 180
    brief = str(tmp_path / "brief.txt")
    run_cli(capsys, "schedule", "--kind", "oblivious_kshot", "--n", "25", "--k", "3",
            "--header-only", "--out", brief)
    assert len(open(brief).read().splitlines()) == 1
    assert load_schedule(brief).period == 180


def test_horizon_env_override(capsys, chain3, monkeypatch):
    monkeypatch.setenv("KSHOT_HORIZON", "1")
    code, out, _ = run_cli(capsys, "simulate", "--graph", chain3,
                           "--schedule", "round_robin", "--k", "1")
    assert code == 1  # cannot finish a 3-chain in one step
    assert ",none," in out
