import json

import pytest

from privcmp.cli import EXIT_CHEAT, EXIT_ERROR, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def out_path(tmp_path):
    return str(tmp_path / "run.jsonl")


def test_compare_default_example(capsys, out_path):
    code, out, _ = run(capsys, "compare", "--a", "9", "--b", "5", "--n", "20",
                       "--seed", "7", "--out", out_path)
    assert code == EXIT_OK
    assert out.strip() == "greater"


def test_compare_rational_literals(capsys, out_path):
    code, out, _ = run(capsys, "compare", "--a", "-7/3", "--b", "-5/2", "--out", out_path)
    assert (code, out.strip()) == (EXIT_OK, "greater")


def test_compare_single_flip_splits_over_seeds(capsys):
    seen = {}
    for seed in range(40):
        code, out, _ = run(capsys, "compare", "--a", "9", "--b", "5", "--n", "5",
                           "--trent", "flip-random:1", "--seed", str(seed), "--out", "-")
        seen.setdefault(out.strip(), set()).add(code)
    assert set(seen) == {"less", "cheat-detected"}
    assert seen["less"] == {EXIT_OK}
    assert seen["cheat-detected"] == {EXIT_CHEAT}


def test_compare_equal_secrets(capsys):
    code, _, err = run(capsys, "compare", "--a", "5", "--b", "5", "--out", "-")
    assert code == EXIT_ERROR
    assert "EqualSecrets" in err


@pytest.mark.parametrize("argv", [
    ["compare", "--a", "1.5", "--b", "2", "--out", "-"],
    ["compare", "--a", "1", "--b", "2", "--n", "1", "--out", "-"],
    ["compare", "--a", "1", "--b", "2", "--trent", "nonsense", "--out", "-"],
    ["compare", "--a", "1", "--b", "2", "--seed", "-1", "--out", "-"],
    ["compare", "--b", "2"],
    ["qpc", "--a", "1", "--b", "2", "--n", "4", "--m", "4", "--out", "-"],
    ["attack", "--n", "1"],
    ["leakage", "--bits", "70"],
    ["leakage", "--bits", "0"],
    ["leakage", "--bits", "9", "--oracle"],
])
def test_config_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_ERROR


def test_qpc_examples(capsys, out_path):
    assert run(capsys, "qpc", "--a", "5", "--b", "5", "--n", "10", "--m", "3",
               "--out", out_path)[:2] == (EXIT_OK, "equal\n")
    assert run(capsys, "qpc", "--a", "5", "--b", "6", "--out", out_path)[:2] == (
        EXIT_OK, "not-equal\n")
    assert run(capsys, "qpc", "--a", "5", "--b", "6", "--trent", "equality-lie:all",
               "--out", out_path)[:2] == (EXIT_CHEAT, "cheat-detected\n")


def test_qpc_m_range(capsys):
    code, out, _ = run(capsys, "qpc", "--a", "5", "--b", "5", "--n", "10",
                       "--m-range", "2,3", "--format", "json", "--out", "-")
    assert code == EXIT_OK
    assert json.loads(out)["m"] in (2, 3)


def test_attack_exhaustive(capsys):
    code, out, _ = run(capsys, "attack", "--k", "2", "--n", "5", "--exhaustive",
                       "--format", "json")
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["empirical"] == 1.0 and data["trials"] == 50


def test_attack_honest(capsys):
    code, out, _ = run(capsys, "attack", "--k", "0", "--trials", "200", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["empirical"] == 0.0


def test_attack_table(capsys):
    code, out, _ = run(capsys, "attack", "--n", "4", "--k", "1", "--trials", "400")
    assert code == EXIT_OK
    assert "analytic" in out and "0.750000" in out


def test_leakage_two_bits(capsys):
    code, out, _ = run(capsys, "leakage", "--bits", "2")
    assert code == EXIT_OK
    assert "Ī = 1.3333 (4/3)" in out


def test_leakage_oracle(capsys):
    code, out, _ = run(capsys, "leakage", "--bits", "4", "--oracle")
    assert code == EXIT_OK
    assert "oracle: agree" in out
    code, out, _ = run(capsys, "leakage", "--bits", "4", "--oracle", "--format", "json")
    assert json.loads(out)["oracle_agrees"] is True


def test_determinism(capsys, tmp_path):
    paths = [tmp_path / "one.jsonl", tmp_path / "two.jsonl"]
    reports = []
    for p in paths:
        reports.append(run(capsys, "compare", "--a", "9", "--b", "5", "--n", "20",
                           "--seed", "7", "--format", "json", "--out", str(p))[1])
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert reports[0] == reports[1]


def test_seed_changes_transcript(capsys, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    run(capsys, "compare", "--a", "9", "--b", "5", "--seed", "1", "--out", str(a))
    run(capsys, "compare", "--a", "9", "--b", "5", "--seed", "2", "--out", str(b))
    assert a.read_bytes() != b.read_bytes()


def _view(capsys, path, who):
    code, out, _ = run(capsys, "views", path, "--as", who, "--format", "json")
    assert code == EXIT_OK
    return [json.loads(line) for line in out.splitlines()]


def _plain_fields(events):
    names = set()
    for e in events:
        for key in ("payload", "announcement"):
            if key in e:
                names |= set(e[key])
    return names


def test_views(capsys, out_path):
    run(capsys, "compare", "--a", "9", "--b", "5", "--n", "6", "--seed", "3", "--out", out_path)
    trent = _plain_fields(_view(capsys, out_path, "trent"))
    assert {"alpha", "beta", "r"} <= trent
    assert not {"a", "b", "c", "lambda", "i0", "decoys"} & trent

    alice = _plain_fields(_view(capsys, out_path, "alice"))
    assert {"a", "c", "lambda", "alpha", "r"} <= alice
    assert not {"b", "beta"} & alice

    bob = _plain_fields(_view(capsys, out_path, "bob"))
    assert {"b", "c", "lambda", "beta", "r"} <= bob
    assert not {"a", "alpha"} & bob

    eve = _view(capsys, out_path, "eve")
    assert {e["kind"] for e in eve} == {"cipher", "announce"}
    assert _plain_fields(eve) == {"round", "r"}


def test_views_table_output(capsys, out_path):
    run(capsys, "compare", "--a", "9", "--b", "5", "--n", "3", "--out", out_path)
    code, out, _ = run(capsys, "views", out_path, "--as", "trent")
    assert code == EXIT_OK
    assert "announce" in out and "alpha" in out


def test_views_redacted_hides_plan(capsys, out_path):
    run(capsys, "compare", "--a", "9", "--b", "5", "--n", "4", "--redact", "--out", out_path)
    alice = _view(capsys, out_path, "alice")
    assert "decoys" not in _plain_fields(alice)
    with open(out_path) as fh:
        assert all(json.loads(line)["kind"] != "record" for line in fh)


def test_views_missing_and_corrupt(capsys, tmp_path):
    assert run(capsys, "views", str(tmp_path / "nope.jsonl"), "--as", "eve")[0] == EXIT_ERROR
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    assert run(capsys, "views", str(bad), "--as", "eve")[0] == EXIT_ERROR


def test_bb84_clean(capsys):
    code, out, _ = run(capsys, "bb84", "--pulses", "2048", "--format", "json")
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["qber"] == 0 and data["keys_equal"]


def test_bb84_intercept_resend(capsys):
    code, out, _ = run(capsys, "bb84", "--pulses", "4096", "--eve", "intercept-resend",
                       "--format", "json")
    data = json.loads(out)
    assert code == EXIT_CHEAT and data["aborted"]
    assert abs(data["qber"] - 0.25) < 0.05


def test_compare_over_bb84_keys(capsys, out_path):
    code, out, _ = run(capsys, "compare", "--a", "2", "--b", "3", "--n", "4",
                       "--key-source", "bb84", "--out", out_path)
    assert (code, out.strip()) == (EXIT_OK, "less")


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "privcmp", "leakage", "--bits", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "4/3" in proc.stdout
