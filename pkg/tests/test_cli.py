import csv
import json

import numpy as np
import pytest

from archpanel.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, main
from archpanel.io import load_panel_csv, save_scenario_config
from archpanel.dgp import ArchConfig, ScenarioConfig


@pytest.fixture
def config_path(tmp_path):
    config = ScenarioConfig(
        name="cli-mini",
        n_series=8,
        series_length=20,
        phi=0.6,
        cluster_sizes=(4, 4),
        arch_per_cluster=(ArchConfig(1.0, 1.0), ArchConfig(1.0, 0.0)),
        seed=3,
    )
    path = tmp_path / "scenario.json"
    save_scenario_config(config, path)
    return path


@pytest.fixture
def panel_files(tmp_path, config_path):
    data = tmp_path / "panel.csv"
    cmap = tmp_path / "clusters.csv"
    code = main(
        [
            "simulate",
            str(config_path),
            "--out",
            str(data),
            "--clusters-out",
            str(cmap),
        ]
    )
    assert code == EXIT_OK
    return data, cmap


class TestSimulate:
    def test_writes_loadable_panel(self, panel_files):
        data, cmap = panel_files
        panel = load_panel_csv(data, cmap)
        assert panel.values.shape == (8, 20)
        assert panel.cluster_of == (1, 1, 1, 1, 2, 2, 2, 2)

    def test_repeat_is_byte_identical(self, tmp_path, config_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["simulate", str(config_path), "--out", str(a)]) == EXIT_OK
        assert main(["simulate", str(config_path), "--out", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_seed_override_changes_values(self, tmp_path, config_path, panel_files):
        data, _ = panel_files
        other = tmp_path / "other.csv"
        code = main(
            ["simulate", str(config_path), "--seed", "99", "--out", str(other)]
        )
        assert code == EXIT_OK
        base = load_panel_csv(data)
        reseeded = load_panel_csv(other)
        assert not np.array_equal(base.values, reseeded.values)

    def test_stdout_default(self, config_path, capsys):
        assert main(["simulate", str(config_path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("time,series_1,")

    def test_catalog_scenario_by_name(self, tmp_path):
        dest = tmp_path / "cat.csv"
        code = main(
            ["simulate", "--scenario", "single-phi0.6-null", "--out", str(dest)]
        )
        assert code == EXIT_OK
        assert load_panel_csv(dest).values.shape == (50, 50)

    def test_config_and_scenario_conflict(self, config_path, capsys):
        code = main(
            ["simulate", str(config_path), "--scenario", "single-phi0.6-null"]
        )
        assert code == EXIT_INPUT
        assert "exactly one" in capsys.readouterr().err

    def test_neither_source_given(self, capsys):
        assert main(["simulate"]) == EXIT_INPUT

    def test_unknown_scenario_name(self, capsys):
        assert main(["simulate", "--scenario", "nope"]) == EXIT_INPUT
        assert "unknown scenario" in capsys.readouterr().err


class TestFit:
    def test_human_output(self, panel_files, capsys):
        data, cmap = panel_files
        code = main(
            ["fit", str(data), "--clusters", str(cmap), "--resamples", "30"]
        )
        assert code == EXIT_OK
        assert "common AR(1) coefficient" in capsys.readouterr().out

    def test_json_to_file(self, tmp_path, panel_files):
        data, cmap = panel_files
        out = tmp_path / "fit.json"
        code = main(
            [
                "fit", str(data), "--clusters", str(cmap),
                "--resamples", "30", "--format", "json", "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        text = out.read_text()
        assert text.endswith("\n")
        parsed = json.loads(text)
        assert parsed["kind"] == "fit"
        assert len(parsed["clusters"]) == 2

    def test_diff_flag(self, panel_files, capsys):
        data, cmap = panel_files
        code = main(
            [
                "fit", str(data), "--clusters", str(cmap),
                "--resamples", "30", "--diff",
            ]
        )
        assert code == EXIT_OK


class TestTest:
    def test_detects_volatile_cluster(self, tmp_path):
        config = ScenarioConfig(
            name="wide",
            n_series=20,
            series_length=50,
            phi=0.6,
            cluster_sizes=(10, 10),
            arch_per_cluster=(ArchConfig(1.0, 1.0), ArchConfig(1.0, 0.0)),
            seed=3,
        )
        cfg_path = tmp_path / "wide.json"
        save_scenario_config(config, cfg_path)
        data = tmp_path / "wide.csv"
        cmap = tmp_path / "wide-clusters.csv"
        assert main(
            [
                "simulate", str(cfg_path),
                "--out", str(data), "--clusters-out", str(cmap),
            ]
        ) == EXIT_OK
        out = tmp_path / "test.json"
        code = main(
            [
                "test", str(data), "--clusters", str(cmap),
                "--boot", "40", "--resamples", "60", "--seed", "3",
                "--format", "json", "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        parsed = json.loads(out.read_text())
        assert parsed["kind"] == "volatility_test"
        rejects = [c["reject"] for c in parsed["clusters"]]
        assert rejects == [True, False]

    def test_repeat_is_identical(self, tmp_path, panel_files):
        data, cmap = panel_files
        outs = []
        for name in ("t1.json", "t2.json"):
            out = tmp_path / name
            code = main(
                [
                    "test", str(data), "--clusters", str(cmap),
                    "--boot", "25", "--resamples", "25",
                    "--format", "json", "--out", str(out),
                ]
            )
            assert code == EXIT_OK
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestBaseline:
    def test_json_rows(self, panel_files, tmp_path):
        data, cmap = panel_files
        out = tmp_path / "base.json"
        code = main(
            [
                "baseline", str(data), "--clusters", str(cmap),
                "--format", "json", "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        parsed = json.loads(out.read_text())
        assert parsed["kind"] == "univariate"
        assert len(parsed["series"]) == 8


class TestDiff:
    def test_writes_differenced_panel(self, tmp_path, panel_files):
        data, _ = panel_files
        out = tmp_path / "diffed.csv"
        assert main(["diff", str(data), "--out", str(out)]) == EXIT_OK
        original = load_panel_csv(data)
        diffed = load_panel_csv(out)
        np.testing.assert_allclose(
            diffed.values, np.diff(original.values, axis=1)
        )


class TestBench:
    def test_subset_csv(self, tmp_path):
        out = tmp_path / "bench.csv"
        code = main(
            [
                "bench",
                "--scenarios", "single-phi0.6-null,cl5-1vol-phi0.6",
                "--reps", "2", "--boot", "25", "--resamples", "25",
                "--skip-parametric", "--format", "csv", "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        rows = list(csv.reader(out.read_text().splitlines()))
        assert len(rows) == 3
        assert rows[1][0] == "single-phi0.6-null"
        assert rows[2][0] == "cl5-1vol-phi0.6"
        by_name = {r[0]: r for r in rows[1:]}
        assert by_name["single-phi0.6-null"][7] == ""

    def test_scenario_row_independent_of_selection(self, tmp_path):
        pair = tmp_path / "pair.csv"
        solo = tmp_path / "solo.csv"
        base = [
            "bench", "--reps", "2", "--boot", "25", "--resamples", "25",
            "--skip-parametric", "--format", "csv",
        ]
        assert main(
            base
            + [
                "--scenarios", "single-phi0.6-null,single-phi0.6-vol",
                "--out", str(pair),
            ]
        ) == EXIT_OK
        assert main(
            base + ["--scenarios", "single-phi0.6-vol", "--out", str(solo)]
        ) == EXIT_OK
        pair_rows = {r[0]: r for r in csv.reader(pair.read_text().splitlines())}
        solo_rows = {r[0]: r for r in csv.reader(solo.read_text().splitlines())}
        assert pair_rows["single-phi0.6-vol"] == solo_rows["single-phi0.6-vol"]

    def test_unknown_scenario(self, capsys):
        assert main(["bench", "--scenarios", "ghost"]) == EXIT_INPUT
        assert "unknown scenarios" in capsys.readouterr().err


class TestErrorExits:
    def test_missing_panel_file(self, capsys):
        assert main(["fit", "/no/such/file.csv"]) == EXIT_INPUT

    def test_bad_cluster_map(self, tmp_path, panel_files, capsys):
        data, _ = panel_files
        bad = tmp_path / "badmap.csv"
        bad.write_text("series_id,cluster_id\nseries_1,one\n")
        code = main(["fit", str(data), "--clusters", str(bad)])
        assert code == EXIT_INPUT

    def test_constant_panel_is_numeric_failure(self, tmp_path, capsys):
        data = tmp_path / "flat.csv"
        data.write_text(
            "time,a,b\n1,1.0,2.0\n2,1.0,2.0\n3,1.0,2.0\n4,1.0,2.0\n"
        )
        code = main(["fit", str(data), "--resamples", "30"])
        assert code == EXIT_NUMERIC
        assert "numerical failure" in capsys.readouterr().err

    def test_bad_option_value(self, panel_files, capsys):
        data, cmap = panel_files
        code = main(
            ["test", str(data), "--clusters", str(cmap), "--boot", "5"]
        )
        assert code == EXIT_INPUT
