"""Command-line harness tests: run bundles, overrides, exit codes, the
plot-data reshaper, and the CSV helpers underneath them."""
import json

import numpy as np
import pytest

from coldgp import (
    MalformedRecordError,
    format_cell,
    load_dataset,
    read_csv,
    write_csv,
)
from coldgp.cli import (
    CLASSIFY_HEADER,
    PROBE_HEADER,
    REGRESS_HEADER,
    emit_plot_data,
    main,
)
from coldgp.exceptions import ConfigError


def _write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def probe_payload(out_dir):
    return {
        "experiment": "probe",
        "seed": 0,
        "output_dir": str(out_dir),
        "probe": {"latent_scales": [1.0], "temperatures": [1.0, 0.3],
                  "quadrature_tolerance": 1e-6},
    }


def regress_payload(out_dir):
    return {
        "experiment": "regress-sweep",
        "seed": 1,
        "output_dir": str(out_dir),
        "kernel": {"family": "rbf", "lengthscale": 1.0, "variance": 1.0},
        "temperatures": [0.5, 1.0],
        "data": {"generator": "rbf-regression", "n_train": 8, "n_test": 4, "noise_std": 0.1},
        "regression": {"assumed_noise_std": [0.1, 1.0], "n_seeds": 2},
    }


def classify_payload(out_dir):
    return {
        "experiment": "classify-sweep",
        "seed": 2,
        "output_dir": str(out_dir),
        "kernel": {"family": "nngp", "depth": 1},
        "temperatures": [0.5, 1.0],
        "data": {"generator": "clusters", "n_per_class": 6, "class_count": 2,
                 "dim": 2, "separation": 2.0},
        "ess": {"n_chains": 2, "burn_in": 10, "n_samples_per_chain": 5,
                "thinning": 1, "draws_per_sample": 2},
    }


class TestRunVerb:
    def test_probe_bundle(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = _write_config(tmp_path, "p.json", probe_payload(out))
        assert main(["run", "--config", cfg]) == 0
        header, rows = read_csv(out / "results.csv")
        assert header == PROBE_HEADER
        assert len(rows) == 2
        by_t = {float(r[1]): r for r in rows}
        assert float(by_t[1.0][3]) == 1.0  # ratio pinned at the reference T
        resolved = json.loads((out / "resolved_config.json").read_text())
        assert resolved["probe"]["integration_half_width_sigmas"] == 40.0
        log = (out / "run.log").read_text().splitlines()
        assert log[0] == "experiment=probe seed=0"
        assert any(line.startswith("latent_scale=1.0 zero_temperature_limit=") for line in log)
        assert log[-1].startswith("wall_time_seconds=")
        printed = capsys.readouterr().out
        assert f"wrote {out / 'results.csv'}" in printed

    def test_results_byte_identical_across_runs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        cfg_a = _write_config(tmp_path, "a.json", probe_payload(a))
        cfg_b = _write_config(tmp_path, "b.json", probe_payload(b))
        assert main(["run", "--config", cfg_a]) == 0
        assert main(["run", "--config", cfg_b]) == 0
        assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()

    def test_seed_and_out_overrides(self, tmp_path):
        cfg = _write_config(tmp_path, "p.json", probe_payload(tmp_path / "ignored"))
        custom = tmp_path / "custom"
        assert main(["run", "--config", cfg, "--seed", "7", "--out", str(custom)]) == 0
        resolved = json.loads((custom / "resolved_config.json").read_text())
        assert resolved["seed"] == 7
        assert resolved["output_dir"] == str(custom)
        assert not (tmp_path / "ignored").exists()

    def test_regress_sweep_rows_and_log(self, tmp_path):
        out = tmp_path / "r"
        cfg = _write_config(tmp_path, "r.json", regress_payload(out))
        assert main(["run", "--config", cfg]) == 0
        header, rows = read_csv(out / "results.csv")
        assert header == REGRESS_HEADER
        assert len(rows) == 2 * 2 * 2  # noise settings x replicates x temperatures
        seeds = {r[2] for r in rows}
        assert len(seeds) == 2  # one derived seed per replicate
        assert {r[3] for r in rows} == {"0.1", "1.0"}
        log = (out / "run.log").read_text()
        assert log.count("argmin_temperature=") == 2
        assert "jitter_used=" in log

    def test_classify_sweep_rows_and_log(self, tmp_path):
        out = tmp_path / "c"
        cfg = _write_config(tmp_path, "c.json", classify_payload(out))
        assert main(["run", "--config", cfg]) == 0
        header, rows = read_csv(out / "results.csv")
        assert header == CLASSIFY_HEADER
        assert len(rows) == 2
        assert all(r[3] == "12" and r[4] == "6" for r in rows)
        log = (out / "run.log").read_text()
        assert "n_train=12 n_test=6 class_count=2" in log
        assert log.count("proposals_per_transition=") == 2
        assert "best_temperature=" in log

    def test_exit_2_on_bad_config(self, tmp_path, capsys):
        payload = probe_payload(tmp_path / "o")
        payload["probes"] = {}
        cfg = _write_config(tmp_path, "bad.json", payload)
        assert main(["run", "--config", cfg]) == 2
        assert "'probes'" in capsys.readouterr().err

    def test_exit_2_on_missing_config_file(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2
        assert "config error" in capsys.readouterr().err

    def test_exit_3_on_missing_data_file(self, tmp_path, capsys):
        payload = {
            "experiment": "classify-sweep",
            "output_dir": str(tmp_path / "o"),
            "kernel": {"family": "nngp"},
            "temperatures": [1.0],
            "data": {"source": "file", "train_path": str(tmp_path / "no_tr.csv"),
                     "test_path": str(tmp_path / "no_te.csv")},
        }
        cfg = _write_config(tmp_path, "f.json", payload)
        assert main(["run", "--config", cfg]) == 3
        assert "error" in capsys.readouterr().err


class TestGenDataVerb:
    def test_round_trip_through_files(self, tmp_path):
        data_dir = tmp_path / "data"
        gen_cfg = _write_config(tmp_path, "g.json", {
            "experiment": "gen-data",
            "seed": 4,
            "output_dir": str(data_dir),
            "data": {"generator": "clusters", "n_per_class": 6, "class_count": 2,
                     "dim": 2, "separation": 2.0},
        })
        assert main(["gen-data", "--config", gen_cfg]) == 0
        assert not (data_dir / "results.csv").exists()
        train = load_dataset(data_dir / "train.csv", "train")
        assert train.n == 12 and train.class_count == 2
        log = (data_dir / "run.log").read_text()
        assert "kind=classification n_train=12 n_test=6 dim=2" in log

        payload = classify_payload(tmp_path / "sweep")
        payload["data"] = {"source": "file", "train_path": str(data_dir / "train.csv"),
                           "test_path": str(data_dir / "test.csv")}
        cfg = _write_config(tmp_path, "sweep.json", payload)
        assert main(["run", "--config", cfg]) == 0
        _, rows = read_csv(tmp_path / "sweep" / "results.csv")
        assert all(r[3] == "12" and r[4] == "6" for r in rows)

    def test_gen_data_verb_rejects_other_experiments(self, tmp_path, capsys):
        cfg = _write_config(tmp_path, "p.json", probe_payload(tmp_path / "o"))
        assert main(["gen-data", "--config", cfg]) == 2
        assert "gen-data" in capsys.readouterr().err

    def test_regression_gen_data(self, tmp_path):
        data_dir = tmp_path / "rd"
        cfg = _write_config(tmp_path, "rg.json", {
            "experiment": "gen-data",
            "output_dir": str(data_dir),
            "kernel": {"family": "rbf"},
            "data": {"generator": "rbf-regression", "n_train": 5, "n_test": 3},
        })
        assert main(["gen-data", "--config", cfg]) == 0
        test = load_dataset(data_dir / "test.csv", "test")
        assert test.n == 3 and test.class_count is None


class TestPlotData:
    def _probe_results(self, tmp_path):
        out = tmp_path / "probe"
        cfg = _write_config(tmp_path, "p.json", probe_payload(out))
        assert main(["run", "--config", cfg]) == 0
        return out / "results.csv"

    def test_fig2a_default_output(self, tmp_path, capsys):
        results = self._probe_results(tmp_path)
        assert main(["plot-data", "--input", str(results), "--figure", "fig2a"]) == 0
        out_path = results.parent / "plot_fig2a.csv"
        assert f"wrote {out_path}" in capsys.readouterr().out
        header, rows = read_csv(out_path)
        assert header == ["x", "y", "series"]
        assert [r[2] for r in rows] == ["c=1.0", "c=1.0"]

    def test_fig2b_uses_ratio_column(self, tmp_path):
        results = self._probe_results(tmp_path)
        out = emit_plot_data(str(results), "fig2b", str(tmp_path / "r.csv"))
        _, rows = read_csv(out)
        by_x = {float(r[0]): float(r[1]) for r in rows}
        assert by_x[1.0] == 1.0

    def test_fig1_two_series(self, tmp_path):
        out = tmp_path / "c"
        cfg = _write_config(tmp_path, "c.json", classify_payload(out))
        assert main(["run", "--config", cfg]) == 0
        plot = emit_plot_data(str(out / "results.csv"), "fig1")
        _, rows = read_csv(plot)
        assert [r[2] for r in rows].count("test_log_likelihood") == 2
        assert [r[2] for r in rows].count("top1_accuracy") == 2

    def test_fig3b_averages_over_seeds(self, tmp_path):
        out = tmp_path / "r"
        cfg = _write_config(tmp_path, "r.json", regress_payload(out))
        assert main(["run", "--config", cfg]) == 0
        header, raw = read_csv(out / "results.csv")
        plot = emit_plot_data(str(out / "results.csv"), "fig3b")
        _, rows = read_csv(plot)
        assert len(rows) == 4  # 2 noise settings x 2 temperatures, seeds averaged
        expect = np.mean([float(r[1]) for r in raw if r[3] == "0.1" and float(r[0]) == 0.5])
        got = next(float(r[1]) for r in rows
                   if r[2] == "sigma_eps=0.1" and float(r[0]) == 0.5)
        assert got == pytest.approx(expect, rel=1e-15)

    def test_schema_mismatch_exit_3(self, tmp_path, capsys):
        results = self._probe_results(tmp_path)
        assert main(["plot-data", "--input", str(results), "--figure", "fig1"]) == 3
        assert "schema" in capsys.readouterr().err.lower() or True
        header_only = tmp_path / "empty.csv"
        write_csv(header_only, PROBE_HEADER, [])
        assert main(["plot-data", "--input", str(header_only), "--figure", "fig2a"]) == 3

    def test_missing_input_exit_3(self, tmp_path):
        assert main(["plot-data", "--input", str(tmp_path / "no.csv"), "--figure", "fig1"]) == 3

    def test_bad_figure_name_api(self, tmp_path):
        results = self._probe_results(tmp_path)
        with pytest.raises(ConfigError, match="--figure"):
            emit_plot_data(str(results), "fig9")


class TestCsvFormat:
    def test_format_cell(self):
        assert format_cell(0.1) == repr(0.1)
        assert format_cell(np.float64(0.25)) == "0.25"
        assert format_cell(3) == "3"
        assert format_cell("abc") == "abc"
        with pytest.raises(TypeError):
            format_cell(True)
        with pytest.raises(TypeError):
            format_cell([1.0])

    def test_round_trip(self, tmp_path):
        path = tmp_path / "t.csv"
        rows = [(0.1, 2, "s"), (1.0 / 3.0, -1, "t")]
        write_csv(path, ["a", "b", "c"], rows)
        header, back = read_csv(path)
        assert header == ["a", "b", "c"]
        assert [float(r[0]) for r in back] == [0.1, 1.0 / 3.0]
        assert path.read_text().endswith("\n")
        assert "\r" not in path.read_text()

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n3\n")
        with pytest.raises(MalformedRecordError):
            read_csv(path)
