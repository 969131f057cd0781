import json

import numpy as np
import pytest

from dcnflow import read_flows, write_contacts
from dcnflow.cli import main

from helpers import example_dcn, window1_flow, window2_flow

EVENTS_CSV = (
    "timestamp,subject_name,subject_id,verb,object\n"
    "1.0,bash,101,write,/tmp/x\n"
    "2.0,vi,102,read,/tmp/x\n"
)


@pytest.fixture
def contacts_file(tmp_path):
    path = tmp_path / "contacts.csv"
    write_contacts(example_dcn(), path)
    return path


@pytest.fixture
def flows_dir(tmp_path, contacts_file):
    out = tmp_path / "flows"
    code = main([
        "flows", "--contacts", str(contacts_file),
        "--grid", "0,2.5,5", "--beta", "1", "--eps", "0",
        "--out", str(out),
    ])
    assert code == 0
    return out


class TestFlows:
    def test_matches_closed_forms(self, flows_dir, capsys):
        flows, grid, params, names = read_flows(flows_dir)
        assert names is None
        assert grid.boundaries == (0.0, 2.5, 5.0)
        assert (params.beta, params.epsilon) == (1.0, 0.0)
        assert np.max(np.abs(flows[0].probs - window1_flow(1.0))) < 1e-12
        assert np.max(np.abs(flows[1].probs - window2_flow(1.0))) < 1e-12

    def test_progress_goes_to_stderr(self, tmp_path, contacts_file, capsys):
        main(["flows", "--contacts", str(contacts_file), "--grid", "0,5",
              "--beta", "1", "--eps", "0", "--out", str(tmp_path / "f")])
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "wrote 1 window(s)" in captured.err

    def test_auto_beta_lands_in_manifest(self, tmp_path, contacts_file):
        out = tmp_path / "f"
        main(["flows", "--contacts", str(contacts_file), "--grid", "0,5",
              "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["beta"] == 1.0  # mean gap of times 1..4

    def test_colliding_grid_is_sanitized(self, tmp_path, contacts_file):
        out = tmp_path / "f"
        main(["flows", "--contacts", str(contacts_file), "--grid", "0,2,5",
              "--beta", "1", "--eps", "0", "--out", str(out)])
        _, grid, _, _ = read_flows(out)
        assert grid.boundaries == (0.0, 2.5, 5.0)

    def test_grid_file(self, tmp_path, contacts_file):
        grid_file = tmp_path / "grid.txt"
        grid_file.write_text("# boundaries\n0 2.5\n5\n")
        out = tmp_path / "f"
        main(["flows", "--contacts", str(contacts_file), "--grid", str(grid_file),
              "--beta", "1", "--eps", "0", "--out", str(out)])
        assert read_flows(out)[1].boundaries == (0.0, 2.5, 5.0)

    def test_auto_windows(self, tmp_path, contacts_file):
        out = tmp_path / "f"
        code = main(["flows", "--contacts", str(contacts_file), "--auto-windows",
                     "--beta", "1", "--eps", "0", "--out", str(out)])
        assert code == 0
        assert json.loads((out / "manifest.json").read_text())["num_windows"] >= 1

    def test_events_with_default_policy(self, tmp_path, monkeypatch):
        monkeypatch.delenv("DCNFLOW_POLICY", raising=False)
        events = tmp_path / "events.csv"
        events.write_text(EVENTS_CSV)
        out = tmp_path / "f"
        main(["flows", "--events", str(events), "--grid", "0,5",
              "--beta", "1", "--eps", "0", "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["n"] == 3
        assert manifest["names"] == ["bash", "/tmp/x", "vi"]

    def test_policy_env_var(self, tmp_path, monkeypatch):
        policy = tmp_path / "policy.cfg"
        policy.write_text("write = out\n")
        monkeypatch.setenv("DCNFLOW_POLICY", str(policy))
        events = tmp_path / "events.csv"
        events.write_text(EVENTS_CSV)
        out = tmp_path / "f"
        with pytest.warns(UserWarning, match="read"):
            main(["flows", "--events", str(events), "--grid", "0,5",
                  "--beta", "1", "--eps", "0", "--out", str(out)])
        assert json.loads((out / "manifest.json").read_text())["n"] == 2

    def test_policy_flag_beats_env(self, tmp_path, monkeypatch):
        broken = tmp_path / "broken.cfg"
        broken.write_text("write = sideways\n")
        monkeypatch.setenv("DCNFLOW_POLICY", str(broken))
        policy = tmp_path / "policy.cfg"
        policy.write_text("write = out\nread = in\n")
        events = tmp_path / "events.csv"
        events.write_text(EVENTS_CSV)
        out = tmp_path / "f"
        code = main(["flows", "--events", str(events), "--policy", str(policy),
                     "--grid", "0,5", "--beta", "1", "--eps", "0", "--out", str(out)])
        assert code == 0
        assert json.loads((out / "manifest.json").read_text())["n"] == 3


class TestExitCodes:
    def test_missing_input_file_is_a_domain_error(self, tmp_path, capsys):
        code = main(["flows", "--contacts", str(tmp_path / "nope.csv"),
                     "--grid", "0,5", "--out", str(tmp_path / "f")])
        assert code == 1
        assert "dcnflow: error:" in capsys.readouterr().err

    def test_missing_required_flag_is_usage(self, contacts_file):
        with pytest.raises(SystemExit) as err:
            main(["flows", "--contacts", str(contacts_file), "--grid", "0,5"])
        assert err.value.code == 2

    def test_exclusive_sources(self, contacts_file):
        with pytest.raises(SystemExit) as err:
            main(["flows", "--contacts", str(contacts_file), "--events", "x",
                  "--grid", "0,5", "--out", "f"])
        assert err.value.code == 2

    def test_threshold_outside_unit_interval(self, flows_dir):
        with pytest.raises(SystemExit) as err:
            main(["detect", "--flows", str(flows_dir), "--lambda", "1.5", "--mu", "0.5"])
        assert err.value.code == 2

    def test_empty_sweep_grid(self, flows_dir, tmp_path, contacts_file):
        truth = tmp_path / "truth.csv"
        truth.write_text("time,source,target\n1.0,1,4\n")
        with pytest.raises(SystemExit) as err:
            main(["sweep", "--flows", str(flows_dir), "--truth", str(truth),
                  "--lambda-grid", "0.5:0.1:0.4", "--mu-grid", "0.9"])
        assert err.value.code == 2

    def test_unreadable_flows_dir(self, tmp_path, capsys):
        code = main(["detect", "--flows", str(tmp_path / "missing"),
                     "--lambda", "0.9", "--mu", "0.9"])
        assert code == 1
        assert "manifest" in capsys.readouterr().err


class TestDetect:
    def test_stdout_report(self, flows_dir, capsys):
        code = main(["detect", "--flows", str(flows_dir), "--lambda", "0.9", "--mu", "0.9"])
        assert code == 0
        blob = json.loads(capsys.readouterr().out)
        assert blob["windows"][0]["flagged"] == [1, 4]
        assert blob["windows"][1]["flagged"] == []
        assert "metrics" not in blob

    def test_scored_report_to_file(self, flows_dir, tmp_path, capsys):
        truth = tmp_path / "truth.csv"
        truth.write_text("time,source,target\n1.0,1,4\n")
        report = tmp_path / "report.json"
        code = main(["detect", "--flows", str(flows_dir), "--truth", str(truth),
                     "--lambda", "0.9", "--mu", "0.9", "--report", str(report)])
        assert code == 0
        assert capsys.readouterr().out == ""
        blob = json.loads(report.read_text())
        assert blob["metrics"]["boolean"]["TPR"] == 1.0
        assert blob["config"] == {"lambda": 0.9, "mu": 0.9}


class TestSweep:
    def test_table_shape_and_header(self, flows_dir, tmp_path, capsys):
        truth = tmp_path / "truth.csv"
        truth.write_text("time,source,target\n1.0,1,4\n")
        code = main(["sweep", "--flows", str(flows_dir), "--truth", str(truth),
                     "--lambda-grid", "0.5:0.2:0.9", "--mu-grid", "0.9"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "lambda,mu,form,TPR,FPR,PPV,NPV"
        assert len(lines) == 1 + 3 * 1 * 2
        assert all(line.count(",") == 6 for line in lines)

    def test_file_output_and_empty_cells(self, flows_dir, tmp_path, capsys):
        truth = tmp_path / "truth.csv"
        truth.write_text("time,source,target\n1.0,1,4\n")
        out = tmp_path / "sweep.csv"
        main(["sweep", "--flows", str(flows_dir), "--truth", str(truth),
              "--lambda-grid", "0.9", "--mu-grid", "0.25", "--out", str(out)])
        lines = out.read_text().splitlines()
        # nothing flagged: PPV has no denominator, so its cell is empty
        assert lines[1].split(",")[5] == ""


class TestEmbeddable:
    def test_text_verdict(self, contacts_file, capsys):
        code = main(["embeddable", "--contacts", str(contacts_file), "--grid", "0,5"])
        assert code == 0
        assert capsys.readouterr().out == "window 1: embeddable (acyclic-digraph)\n"

    def test_json_lines(self, contacts_file, capsys):
        main(["embeddable", "--contacts", str(contacts_file), "--grid", "0,2.5,5", "--json"])
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 2
        for m, line in enumerate(lines, start=1):
            blob = json.loads(line)
            assert blob["window"] == m
            assert blob["status"] == "embeddable"

    def test_cyclic_two_vertex_window_reports_determinant(self, tmp_path, capsys):
        path = tmp_path / "recip.csv"
        path.write_text("time,source,target\n0.0,1,2\n0.0,2,1\n1.0,1,2\n1.0,2,1\n")
        code = main(["embeddable", "--contacts", str(path), "--grid=-1,0.5,2",
                     "--beta", "1"])
        assert code == 0
        out = capsys.readouterr().out
        assert "positive-det-2x2" in out
        assert "det=" in out


class TestSynth:
    CONFIG = (
        "n = 10\nduration = 30\nbackground_rate = 1.0\n"
        "community_bias = 0.7\nseed = 4\nanomaly = 1-5-9@10:0.1\n"
    )

    def test_seed_override_is_deterministic(self, tmp_path, capsys):
        config = tmp_path / "scenario.cfg"
        config.write_text(self.CONFIG)
        paths = {}
        for tag in ("a", "b"):
            contacts = tmp_path / f"{tag}.csv"
            truth = tmp_path / f"{tag}_truth.csv"
            code = main(["synth", "--config", str(config), "--seed", "99",
                         "--contacts", str(contacts), "--truth", str(truth)])
            assert code == 0
            paths[tag] = (contacts.read_text(), truth.read_text())
        assert paths["a"] == paths["b"]
        assert "ground-truth" in capsys.readouterr().err

    def test_truth_file_holds_the_chain(self, tmp_path):
        config = tmp_path / "scenario.cfg"
        config.write_text(self.CONFIG)
        truth = tmp_path / "truth.csv"
        main(["synth", "--config", str(config),
              "--contacts", str(tmp_path / "c.csv"), "--truth", str(truth)])
        lines = truth.read_text().splitlines()
        assert lines[0] == "time,source,target"
        assert len(lines) == 3  # header plus the two chain hops


class TestReverse:
    def test_double_reverse_is_identity(self, tmp_path, contacts_file):
        once = tmp_path / "rev.csv"
        twice = tmp_path / "back.csv"
        assert main(["reverse", "--contacts", str(contacts_file), "--out", str(once)]) == 0
        assert main(["reverse", "--contacts", str(once), "--out", str(twice)]) == 0
        assert twice.read_text() == contacts_file.read_text()
        assert once.read_text() != contacts_file.read_text()


class TestOracleCheck:
    def test_reports_both_oracles(self, contacts_file, capsys):
        code = main(["oracle-check", "--contacts", str(contacts_file), "--grid", "0,5",
                     "--beta", "1", "--eps", "0", "--samples", "2000", "--seed", "1"])
        assert code == 0
        out = capsys.readouterr().out
        assert "window 1: topo max |delta|" in out
        assert "overall:" in out
