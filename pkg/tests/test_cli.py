import subprocess
import sys

import pytest

from kpartite.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, EXIT_SUITE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(out):
    lines = out.strip().splitlines()
    assert lines[0].split("\t")[0] == "criterion"
    return [line.split("\t") for line in lines[1:]]


def test_eval_ghz(capsys):
    code, out, _ = run(capsys, "eval", "--family", "GhzMix10", "--p", "0.2", "--q", "0.1",
                       "--criterion", "thm1", "--k", "3")
    assert code == EXIT_OK
    [rec] = records(out)
    assert rec[:2] == ["thm1", "3"]
    assert float(rec[2]) == pytest.approx(1.56524, abs=1e-5)
    assert float(rec[3]) == pytest.approx(0.698633, abs=1e-6)
    assert rec[5] == "true"
    # at least six significant digits in every number
    assert len(rec[2].replace(".", "").lstrip("0")) >= 6


def test_eval_noise_corner(capsys):
    code, out, _ = run(capsys, "eval", "--family", "GhzMix10", "--p", "0", "--q", "0",
                       "--criterion", "thm1", "--k", "3")
    assert code == EXIT_OK and records(out)[0][5] == "false"


def test_eval_w_preset(capsys):
    code, out, _ = run(capsys, "eval", "--family", "WQutritMix", "--p", "1", "--q", "0",
                       "--criterion", "thm2", "--k", "3", "--base", "0000", "--omega", "1,2")
    [rec] = records(out)
    assert (float(rec[2]), float(rec[3]), rec[5]) == (6.0, 4.0, "true")


def test_eval_multiple_criteria_and_levels(capsys):
    code, out, _ = run(capsys, "eval", "--family", "ghz", "--n", "6", "--p", "0.5",
                       "--criterion", "thm1,critI", "--k", "2,3")
    assert code == EXIT_OK
    assert [(r[0], r[1]) for r in records(out)] == [("thm1", "2"), ("thm1", "3"), ("critI", "2"), ("critI", "3")]


def test_eval_pairwise_level_one(capsys):
    code, out, _ = run(capsys, "eval", "--family", "ghz", "--n", "3", "--p", "1",
                       "--criterion", "thm2", "--k", "1", "--omega", "1")
    assert code == EXIT_OK
    assert len(records(out)) == 3


def test_eval_phi_override(capsys):
    code, out, _ = run(capsys, "eval", "--family", "ghz", "--n", "3", "--p", "1",
                       "--criterion", "thm1", "--k", "1", "--phi", "000,011")
    [rec] = records(out)
    assert float(rec[2]) == 0.0


@pytest.mark.parametrize("argv", [
    ["eval", "--family", "WQutritMix", "--criterion", "critI", "--k", "2"],
    ["eval", "--family", "GhzMix10", "--criterion", "thm1", "--k", "10"],
    ["eval", "--family", "nope"],
    ["eval", "--criterion", "thm7"],
    ["eval", "--p", "0.8", "--q", "0.8"],
    ["eval", "--family", "WQutritMix", "--criterion", "thm2", "--k", "2", "--base", "000"],
    ["eval", "--unknown-flag"],
])
def test_eval_validation_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == EXIT_INVALID


def test_sweep_minimal_grid(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--family", "ghz", "--n", "4", "--criterion", "thm1", "--k", "2",
                       "--resolution", "2", "--rays", "0", "--format", "csv", "--out", str(tmp_path))
    assert code == EXIT_OK
    lines = (tmp_path / "GhzMix4_thm1_k2_grid.csv").read_text().splitlines()
    assert lines[0] == "p,q,margin" and len(lines) == 4


def test_sweep_figure_bundle(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--family", "GhzMix10", "--criterion", "thm1,critI", "--k", "3,4",
                       "--resolution", "0", "--rays", "6", "--out", str(tmp_path))
    assert code == EXIT_OK
    for crit in ("thm1", "critI"):
        for k in (3, 4):
            assert (tmp_path / f"GhzMix10_{crit}_k{k}.csv").exists()
            assert (tmp_path / f"GhzMix10_{crit}_k{k}.svg").exists()
    combined = (tmp_path / "GhzMix10_thm1_critI.svg").read_text()
    assert combined.count("<polyline") == 4


def test_sweep_w_family_with_empty_curve(capsys, tmp_path):
    code, out, err = run(capsys, "sweep", "--family", "WQutritMix", "--criterion", "thm2,critIII",
                         "--k", "2", "--resolution", "0", "--rays", "4", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert (tmp_path / "WQutritMix_critIII_k2.csv").read_text() == "p,q\n"
    assert "without a crossing" in err
    lines = (tmp_path / "WQutritMix_thm2_k2.csv").read_text().splitlines()
    # the shifted W state has no weight near the base label, so the q-axis ray has no crossing
    assert len(lines) == 4
    assert float(lines[1].split(",")[0]) == pytest.approx(16 / 97, abs=1e-5)


def test_sweep_unwritable_output(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "sweep", "--family", "ghz", "--n", "3", "--k", "1", "--resolution", "2",
                       "--rays", "0", "--out", str(blocker / "sub"))
    assert code == EXIT_IO


def test_sweep_is_deterministic(capsys, tmp_path):
    argv = ["sweep", "--family", "ghz", "--n", "6", "--criterion", "thm3", "--k", "3",
            "--resolution", "9", "--rays", "5"]
    run(capsys, *argv, "--out", str(tmp_path / "a"))
    run(capsys, *argv, "--out", str(tmp_path / "b"), "--workers", "2")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len(names) == 4
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_verify_single_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "oracle", "--n", "3", "--samples", "3")
    assert code == EXIT_OK
    assert out.startswith("PASS oracle")
    assert "soundness" not in out
    assert "0 failures" in out.splitlines()[-1]


def test_verify_all_suites_small(capsys):
    code, out, _ = run(capsys, "verify", "--seed", "42", "--samples", "10")
    assert code == EXIT_OK
    for name in ("oracle", "soundness", "recovery", "observables"):
        assert f"PASS {name}" in out


def test_verify_reports_failures(capsys, monkeypatch):
    from kpartite import criteria, verify
    # sabotage: a criterion that always fires must make the soundness suite fail
    real = criteria.swap_producibility
    monkeypatch.setattr(criteria, "swap_producibility",
                        lambda rho, fid, k: criteria.make_verdict("thm1", k, 1.0, 0.0, criteria.Conclusion.INCONCLUSIVE))
    code, out, _ = run(capsys, "verify", "--suite", "soundness", "--samples", "2")
    assert code == EXIT_SUITE
    assert "FAIL soundness" in out
    assert real is not criteria.swap_producibility


def test_verify_bad_suite(capsys):
    code, _, err = run(capsys, "verify", "--suite", "nope")
    assert code == EXIT_INVALID and "unknown suite" in err


def test_config_document_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# archived run\nfamily = GhzMix10\np = 0.2\nq = 0.1\ncriterion = thm1\nk = 4\n")
    code, out, _ = run(capsys, "eval", "--config", str(cfg))
    assert records(out)[0][:2] == ["thm1", "4"]
    code, out, _ = run(capsys, "eval", "--config", str(cfg), "--k", "3")
    assert records(out)[0][:2] == ["thm1", "3"]
    assert float(records(out)[0][2]) == pytest.approx(1.56524758, abs=1e-8)


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = red\n")
    code, _, err = run(capsys, "eval", "--config", str(cfg))
    assert code == EXIT_INVALID


def test_missing_config_is_io_error(capsys, tmp_path):
    code, _, _ = run(capsys, "eval", "--config", str(tmp_path / "absent.cfg"))
    assert code == EXIT_IO


STATE = """dims = 2 2 2
component = 1
000 : 0.7071067811865476
111 : 0.7071067811865476
component = 1
000 : 0.7071067811865476
111 : -0.7071067811865476j
"""


def test_state_file_family(capsys, tmp_path):
    path = tmp_path / "ghz3.state"
    path.write_text(STATE)
    code, out, _ = run(capsys, "eval", "--state-file", str(path), "--p", "0.2", "--q", "0.1",
                       "--criterion", "thm1", "--k", "2")
    assert code == EXIT_OK
    code2, out2, _ = run(capsys, "eval", "--family", "ghz", "--n", "3", "--p", "0.2", "--q", "0.1",
                         "--criterion", "thm1", "--k", "2")
    assert records(out)[0][2:] == records(out2)[0][2:]


def test_state_file_errors(capsys, tmp_path):
    path = tmp_path / "bad.state"
    path.write_text("dims = 2 2\ncomponent = 1\n00 : 1\n")
    code, _, err = run(capsys, "eval", "--state-file", str(path))
    assert code == EXIT_INVALID and "two components" in err
    code, _, _ = run(capsys, "eval", "--state-file", str(tmp_path / "missing"))
    assert code == EXIT_IO


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "kpartite", "eval", "--family", "ghz", "--n", "4",
                          "--p", "1", "--criterion", "thm3", "--k", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "KNonseparable" in res.stdout
