import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

from qprobe import cli, harness
from qprobe.corpus import decoupling_corpus
from qprobe.errors import ConfigError

GOLDEN = Path(__file__).parent / "golden"
R = 1 / math.sqrt(2)


def minimal(**over):
    doc = {"schema_version": 1, "name": "minimal", "kind": "conjugate_protocol", "n": 2,
           "state": {"amplitudes": [[R, 0.0], [R, 0.0]]}}
    doc.update(over)
    return doc


def pairs(m):
    m = np.asarray(m, dtype=complex)
    return [[[z.real, z.imag] for z in row] for row in m]


def dephasing_doc(**sim):
    entry = next(e for e in decoupling_corpus() if e.name == "commuting_dephasing")
    p = entry.problem
    dc = {"dims": list(p.dims), "c0": pairs(p.c0.matrix), "drift": pairs(p.drift.matrix),
          "controls": [pairs(c.matrix) for c in p.controls], "interaction": pairs(p.interaction.matrix)}
    if sim:
        dc["simulate"] = sim
    return {"schema_version": 1, "name": "dephasing", "kind": "decoupling_check", "decoupling": dc}


def sweep_doc():
    return {"schema_version": 1, "name": "sweep", "kind": "lambda_sweep", "n": 4, "seed": 7,
            "state": {"amplitudes": [[0.5, 0.0]] * 4},
            "schedule": {"windows": [[0, 1], [2, 3], [4, 5], [6, 7]]},
            "probe": {"coupling": {"breakpoints": [0, 1, 2, 3, 4, 5, 6, 7],
                                   "values": [math.pi / 2, 0, math.pi / 2, 0, math.pi / 2, 0, math.pi / 2]}},
            "thetas": [0.0, 0.5, 2.0, 40.0]}


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestParse:
    def test_minimal_defaults(self):
        sc = harness.scenario_from_dict(minimal())
        assert sc.probe["a"] == [0.0, 1.0] and sc.probe["s"] == [0.0, 1.0]
        assert sc.probe["hbar"] == 1.0
        assert sc.probe["coupling"] == {"breakpoints": [0.0, 1.0], "values": [math.pi]}
        assert sc.schedule == {"windows": [[0.0, 1.0]]}
        assert sc.seed == 0 and sc.output_path == "minimal"

    def test_normalization_error_names_field(self):
        doc = minimal(state={"amplitudes": [[0.5, 0.0], [0.5, 0.0]]})
        with pytest.raises(ConfigError, match=r"^state\.amplitudes:") as info:
            harness.scenario_from_dict(doc)
        assert info.value.path == "state.amplitudes"

    @pytest.mark.parametrize("doc, path", [
        (minimal(extra=1), "extra"),
        (minimal(probe={"a": [0, 1], "bogus": 2}), "probe.bogus"),
        (minimal(kind="teleport"), "kind"),
        (minimal(schema_version=2), "schema_version"),
        ({"schema_version": 1, "name": "x", "kind": "conjugate_protocol", "n": 2}, "state"),
        (minimal(probe={"a": [0, 1, 2]}), "probe.a"),
        (minimal(schedule={"windows": [[0, 2], [1, 3]]}), "schedule.windows"),
    ])
    def test_rejections(self, doc, path):
        with pytest.raises(ConfigError) as info:
            harness.scenario_from_dict(doc)
        assert info.value.path == path

    def test_non_hermitian_operator(self):
        doc = dephasing_doc()
        doc["decoupling"]["drift"][0][1] = [1.0, 0.0]
        with pytest.raises(ConfigError) as info:
            harness.scenario_from_dict(doc)
        assert info.value.path == "decoupling.drift"

    def test_fields_for_other_kind_rejected(self):
        doc = dephasing_doc()
        doc["n"] = 2
        with pytest.raises(ConfigError):
            harness.scenario_from_dict(doc)

    def test_invalid_json(self):
        with pytest.raises(ConfigError):
            harness.parse_scenario("{not json")

    @pytest.mark.parametrize("doc", [minimal(), dephasing_doc(n_trials=2), sweep_doc(),
                                     {"schema_version": 1, "name": "t", "kind": "tomography", "n": 3,
                                      "tomography": {"populations": [0.2, 0.3, 0.5]}}])
    def test_round_trip(self, doc):
        sc = harness.scenario_from_dict(doc)
        text = harness.serialize_scenario(sc)
        again = harness.parse_scenario(text)
        assert again == sc
        assert harness.serialize_scenario(again) == text

    def test_hash_stable(self):
        a = harness.config_hash(harness.scenario_from_dict(minimal()))
        b = harness.config_hash(harness.parse_scenario(json.dumps(minimal(), indent=4)))
        assert a == b and len(a) == 40
        assert harness.config_hash(harness.scenario_from_dict(minimal(seed=1))) != a


class TestRun:
    def test_decoupling_dephasing(self):
        rec = harness.run(harness.scenario_from_dict(dephasing_doc()))
        assert rec.report["open_loop_decoupled"] is True
        assert rec.report["simulated_max_deviation"] is None

    def test_decoupling_with_simulation(self):
        rec = harness.run(harness.scenario_from_dict(dephasing_doc(n_trials=2, horizon=1.0, dt=1e-2)))
        assert rec.report["simulated_max_deviation"] < 1e-6

    def test_mixed_lambda_kills_indicator(self):
        doc = minimal(n=4, state={"amplitudes": [[0.5, 0.0]] * 4, "lambda": {"kind": "mixed"}},
                      schedule={"windows": [[0, 1], [2, 3]]})
        rows = harness.run(harness.scenario_from_dict(doc)).rows
        assert len(rows) == 2
        assert all(abs(r["coherence_indicator"]) < 1e-8 for r in rows)

    def test_pure_state_indicator_one(self):
        doc = minimal(n=4, state={"amplitudes": [[0.5, 0.0]] * 4})
        rows = harness.run(harness.scenario_from_dict(doc)).rows
        assert rows[0]["coherence_indicator"] == pytest.approx(1.0, abs=1e-9)

    def test_sweep_rows_ordered_and_monotone(self):
        rows = harness.run(harness.scenario_from_dict(sweep_doc())).rows
        ts = [r["t"] for r in rows]
        assert ts == sorted(ts)
        ind = [r["coherence_indicator"] for r in rows]
        assert all(x >= y - 1e-12 for x, y in zip(ind, ind[1:]))

    def test_direct_measure(self):
        doc = minimal(kind="direct_measure", state={"populations": [0.25, 0.75]})
        rows = harness.run(harness.scenario_from_dict(doc)).rows
        assert rows[0]["expected_a"] == pytest.approx(0.75, abs=1e-12)

    def test_tomography(self):
        doc = {"schema_version": 1, "name": "t", "kind": "tomography", "n": 4,
               "tomography": {"populations": [0.1, 0.2, 0.3, 0.4]}}
        est = harness.run(harness.scenario_from_dict(doc)).estimate
        assert est["max_abs_error"] < 1e-6


class TestEmit:
    def test_header_only_for_empty_schedule(self, tmp_path):
        sc = harness.scenario_from_dict(minimal(schedule={"windows": []}))
        path = harness.emit(harness.run(sc), "csv", tmp_path)
        assert path.read_text() == ",".join(harness.CSV_COLUMNS) + "\n"

    def test_byte_identical_reruns(self, tmp_path):
        sc = harness.scenario_from_dict(sweep_doc())
        for fmt in ("csv", "json"):
            a = harness.emit(harness.run(sc), fmt, tmp_path / "a").read_bytes()
            b = harness.emit(harness.run(sc), fmt, tmp_path / "b").read_bytes()
            assert a == b

    def test_golden_csv(self, tmp_path):
        path = harness.emit(harness.run(harness.scenario_from_dict(sweep_doc())), "csv", tmp_path)
        assert path.read_text() == (GOLDEN / "sweep.csv").read_text()

    def test_json_round_trip(self, tmp_path):
        rec = harness.run(harness.scenario_from_dict(sweep_doc()))
        path = harness.emit(rec, "json", tmp_path)
        assert harness.RunRecord.from_dict(json.loads(path.read_text())) == rec

    def test_seventeen_digits(self, tmp_path):
        text = harness.emit(harness.run(harness.scenario_from_dict(sweep_doc())), "csv", tmp_path).read_text()
        row = text.splitlines()[2].split(",")
        assert float(row[3]) == harness.run(harness.scenario_from_dict(sweep_doc())).rows[1]["pure_prediction"]

    def test_csv_for_report_kind_rejected(self, tmp_path):
        rec = harness.run(harness.scenario_from_dict(dephasing_doc()))
        with pytest.raises(ConfigError):
            harness.emit(rec, "csv", tmp_path)

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(harness.OUTPUT_DIR_ENV, str(tmp_path))
        path = harness.emit(harness.run(harness.scenario_from_dict(minimal())))
        assert path == tmp_path / "minimal.csv" and path.exists()
        assert not any(p.name.endswith(".tmp") for p in tmp_path.iterdir())


class TestCli:
    def test_run(self, tmp_path, capsys):
        cfg = write(tmp_path, minimal())
        assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "minimal.csv").exists()

    def test_run_seed_override(self, tmp_path):
        cfg = write(tmp_path, minimal())
        assert cli.main(["run", cfg, "--out", str(tmp_path), "--format", "json", "--seed", "11"]) == 0
        assert json.loads((tmp_path / "minimal.json").read_text())["seed"] == 11

    def test_validate_echoes_defaults(self, tmp_path, capsys):
        assert cli.main(["validate", write(tmp_path, minimal())]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["probe"]["a"] == [0.0, 1.0]

    def test_check_decoupling(self, tmp_path, capsys):
        assert cli.main(["check-decoupling", write(tmp_path, dephasing_doc())]) == 0
        assert json.loads(capsys.readouterr().out)["open_loop_decoupled"] is True

    def test_tomography(self, tmp_path, capsys):
        doc = {"schema_version": 1, "name": "t", "kind": "tomography", "n": 2,
               "tomography": {"populations": [0.3, 0.7]}}
        assert cli.main(["tomography", write(tmp_path, doc)]) == 0
        assert json.loads(capsys.readouterr().out)["p_hat"] == pytest.approx([0.3, 0.7], abs=1e-6)

    def test_config_error(self, tmp_path, capsys):
        cfg = write(tmp_path, minimal(state={"amplitudes": [[0.5, 0.0], [0.5, 0.0]]}))
        assert cli.main(["run", cfg, "--out", str(tmp_path)]) == 2
        assert "state.amplitudes" in capsys.readouterr().err

    def test_wrong_kind_for_subcommand(self, tmp_path):
        assert cli.main(["tomography", write(tmp_path, minimal())]) == 2

    def test_numerical_error(self, tmp_path):
        doc = {"schema_version": 1, "name": "t", "kind": "tomography", "n": 3,
               "tomography": {"populations": [0.3, 0.3, 0.4], "s": [0.0, 1e-9, 1.0], "sigma": 0.1}}
        assert cli.main(["tomography", write(tmp_path, doc)]) == 3

    def test_io_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert cli.main(["run", write(tmp_path, minimal()), "--out", str(blocker)]) == 4
        assert cli.main(["validate", str(tmp_path / "missing.json")]) == 4
