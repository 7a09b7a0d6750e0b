import csv
import json
import math

import pytest

from quakesim.cli import ConfigError, RunConfig, parse_config, run_command

REF_CONFIG = {
    "model": {
        "c": 1,
        "k": 0.5,
        "alpha": 1,
        "phi": {"kind": "exp", "scale": 1},
        "z": {"kind": "exponential", "mean": 2},
    },
    "initial": {"x": 0, "y": 0},
    "seed": 42,
    "stop": {"horizon": 1e5},
    "replications": 1,
    "burn_in_fraction": 0.1,
}


def write_config(tmp_path, horizon=400.0, replications=1, **model_overrides):
    cfg = json.loads(json.dumps(REF_CONFIG))
    cfg["stop"] = {"horizon": horizon}
    cfg["replications"] = replications
    cfg["model"].update(model_overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


class TestParseConfig:
    def test_reference_accepted(self):
        cfg = parse_config(json.dumps(REF_CONFIG))
        assert cfg.seed == 42
        assert cfg.model.c == 1.0
        assert cfg.stop.horizon == 1e5
        assert cfg.burn_in_fraction == 0.1

    def test_negative_alpha_path(self):
        bad = json.loads(json.dumps(REF_CONFIG))
        bad["model"]["alpha"] = -1
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(bad))
        assert any("$.model.alpha" in e and "must be > 0" in e for e in exc.value.errors)

    def test_unknown_phi_variant(self):
        bad = json.loads(json.dumps(REF_CONFIG))
        bad["model"]["phi"] = {"kind": "cubic"}
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(bad))
        assert any("$.model.phi.kind" in e and "unknown variant" in e for e in exc.value.errors)

    def test_unknown_key_rejected(self):
        bad = json.loads(json.dumps(REF_CONFIG))
        bad["extra"] = 1
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(bad))
        assert any("$.extra" in e and "unknown key" in e for e in exc.value.errors)

    def test_missing_key_reported(self):
        bad = json.loads(json.dumps(REF_CONFIG))
        del bad["model"]["c"]
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(bad))
        assert any("$.model.c" in e and "missing" in e for e in exc.value.errors)

    def test_seed_range(self):
        bad = json.loads(json.dumps(REF_CONFIG))
        bad["seed"] = -1
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(bad))
        assert any("$.seed" in e for e in exc.value.errors)

    def test_stop_needs_a_bound(self):
        bad = json.loads(json.dumps(REF_CONFIG))
        bad["stop"] = {}
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(bad))
        assert any("$.stop" in e for e in exc.value.errors)

    def test_multiple_errors_collected(self):
        bad = json.loads(json.dumps(REF_CONFIG))
        bad["model"]["alpha"] = -1
        bad["model"]["c"] = 0
        bad["seed"] = "x"
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(bad))
        assert len(exc.value.errors) >= 3

    def test_round_trip(self):
        cfg = parse_config(json.dumps(REF_CONFIG))
        again = parse_config(json.dumps(cfg.to_json_dict()))
        assert again == RunConfig(
            cfg.model, cfg.initial, cfg.seed, cfg.stop, cfg.replications, cfg.burn_in_fraction, cfg.output
        )

    def test_uniform_and_threshold_variants(self):
        alt = json.loads(json.dumps(REF_CONFIG))
        alt["model"]["phi"] = {"kind": "threshold_linear", "theta": 0.5, "slope": 2.0}
        alt["model"]["z"] = {"kind": "uniform", "low": 1, "high": 3}
        cfg = parse_config(json.dumps(alt))
        assert cfg.model.phi.theta == 0.5
        assert cfg.model.z.high == 3.0

    def test_invalid_json(self):
        with pytest.raises(ConfigError, match="invalid JSON"):
            parse_config("{not json")


class TestSimulateCommand:
    def test_csv_contract(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "events.csv"
        code = run_command(["simulate", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        rows = list(csv.reader(out.read_text().splitlines()))
        assert rows[0] == ["n", "t", "dt", "kind", "x", "y", "z", "lambda_pre"]
        assert all(r[3] in ("event", "phantom") for r in rows[1:])
        assert len(rows) > 100

    def test_rows_satisfy_recurrence(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "events.csv"
        run_command(["simulate", "--config", str(cfg), "--out", str(out)])
        rows = list(csv.DictReader(out.read_text().splitlines()))
        x_prev, y_prev = 0.0, 0.0
        for r in rows:
            dt, z = float(r["dt"]), float(r["z"])
            assert float(r["x"]) == pytest.approx(x_prev + 1.0 * dt - z, abs=1e-12)
            assert float(r["y"]) == pytest.approx(y_prev * math.exp(-dt) + 0.5, abs=1e-12)
            x_prev, y_prev = float(r["x"]), float(r["y"])

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_command(["simulate", "--config", str(cfg), "--out", str(a)])
        run_command(["simulate", "--config", str(cfg), "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write_config(tmp_path)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_command(["simulate", "--config", str(cfg), "--out", str(a)])
        run_command(["simulate", "--config", str(cfg), "--out", str(b), "--seed", "7"])
        assert a.read_bytes() != b.read_bytes()

    def test_saturation_exit_code(self, tmp_path):
        cfg_path = tmp_path / "hot.json"
        hot = json.loads(json.dumps(REF_CONFIG))
        hot["initial"] = {"x": 40, "y": 0}
        hot["stop"] = {"horizon": 10.0}
        cfg_path.write_text(json.dumps(hot))
        out = tmp_path / "events.csv"
        code = run_command(["simulate", "--config", str(cfg_path), "--out", str(out)])
        assert code == 2

    def test_summary_written(self, tmp_path):
        cfg = write_config(tmp_path)
        out, summ = tmp_path / "e.csv", tmp_path / "s.json"
        run_command(["simulate", "--config", str(cfg), "--out", str(out), "--summary", str(summ)])
        body = json.loads(summ.read_text())
        assert body["replications"] == 1
        assert body["replicas"][0]["terminated_reason"] == "horizon_reached"


class TestRateCommand:
    def test_reference_rate_theory(self, tmp_path):
        cfg = write_config(tmp_path, horizon=2000.0)
        out = tmp_path / "rate.json"
        code = run_command(["rate", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        body = json.loads(out.read_text())
        assert body["rate_theory"] == 0.5
        assert abs(body["per_replica"][0]["rate_hat"] - 0.5) < 0.05

    def test_threads_do_not_change_bytes(self, tmp_path):
        cfg = write_config(tmp_path, horizon=300.0, replications=6)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run_command(["rate", "--config", str(cfg), "--out", str(a), "--threads", "1"]) == 0
        assert run_command(["rate", "--config", str(cfg), "--out", str(b), "--threads", "4"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_env_thread_fallback(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, horizon=300.0, replications=3)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run_command(["rate", "--config", str(cfg), "--out", str(a)])
        monkeypatch.setenv("QUAKESIM_THREADS", "3")
        run_command(["rate", "--config", str(cfg), "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestOtherCommands:
    def test_regime(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert run_command(["regime", "--config", str(cfg)]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body == {"k_over_alpha": 0.5, "rate_theory": 0.5, "regime": "subcritical"}

    def test_foster_report(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "foster.json"
        code = run_command(["foster", "--config", str(cfg), "--out", str(out), "--weights", "100,10,1"])
        assert code == 0
        body = json.loads(out.read_text())
        assert body["foster_config"]["gamma"] == pytest.approx(0.5 / 3.0, abs=1e-15)
        assert body["report"]["passed"] is True

    def test_foster_bad_weights_exit_one(self, tmp_path):
        cfg = write_config(tmp_path)
        assert run_command(["foster", "--config", str(cfg), "--weights", "1,10,100"]) == 1

    def test_drift_csv(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "drift.csv"
        code = run_command(
            ["drift", "--config", str(cfg), "--out", str(out), "--n", "2000", "--states", "20,1;0,710"]
        )
        assert code == 0
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 2
        assert float(rows[0]["mean"]) < 0

    def test_converge_csv(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "ks.csv"
        code = run_command(
            [
                "converge",
                "--config",
                str(cfg),
                "--out",
                str(out),
                "--t-grid",
                "5,20",
                "--replications",
                "80",
            ]
        )
        assert code == 0
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert [r["t"] for r in rows] == ["5", "20"]

    def test_dominance(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "dom.json"
        code = run_command(["dominance", "--config", str(cfg), "--out", str(out), "--n", "20000"])
        assert code == 0
        body = json.loads(out.read_text())
        assert body["all_passed"] is True
        assert {r["family"] for r in body["orderings"]} == {"secondary", "primary", "shifted_primary"}

    def test_lemma_l2_formats(self, tmp_path):
        cfg = write_config(tmp_path)
        out_csv = tmp_path / "l.csv"
        out_json = tmp_path / "l.json"
        assert run_command(["lemma-l2", "--config", str(cfg), "--out", str(out_csv), "--n", "20000"]) == 0
        assert (
            run_command(
                ["lemma-l2", "--config", str(cfg), "--out", str(out_json), "--n", "20000", "--format", "json"]
            )
            == 0
        )
        rows = list(csv.DictReader(out_csv.read_text().splitlines()))
        assert [r["y"] for r in rows] == ["0.5", "1", "2", "5", "20"]
        body = json.loads(out_json.read_text())
        assert len(body["rows"]) == 5

    def test_probe_supercritical(self, tmp_path):
        cfg_path = tmp_path / "sup.json"
        sup = json.loads(json.dumps(REF_CONFIG))
        sup["model"]["k"] = 2
        sup["stop"] = {"horizon": 50.0}
        cfg_path.write_text(json.dumps(sup))
        out = tmp_path / "probe.json"
        code = run_command(
            ["probe-supercritical", "--config", str(cfg_path), "--out", str(out), "--budget", "50000"]
        )
        assert code == 0
        body = json.loads(out.read_text())
        assert body["regime"] == "supercritical"
        assert body["explosive"] is True

    def test_missing_config_file(self, tmp_path):
        assert run_command(["rate", "--config", str(tmp_path / "nope.json")]) == 1

    def test_invalid_config_exit_one(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{\"model\": {}}")
        assert run_command(["rate", "--config", str(p)]) == 1


class TestSelftest:
    def test_selftest_passes(self, capsys):
        assert run_command(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert "checks passed" in out
