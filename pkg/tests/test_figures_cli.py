import json
import os
import subprocess
import sys

import pytest

from entbuffer.figures import (CATALOG, Experiment, ExperimentConfig,
                               RunManifest, catalog_rows, run, run_figure,
                               write_csv)
from entbuffer.cli import load_config_file, main


class TestConfigValidation:
    def test_unknown_keys_rejected(self):
        cfg = ExperimentConfig(Experiment.STEADY_GRID,
                               {"k": 1, "bogus": 3}, "x.csv")
        with pytest.raises(ValueError, match="bogus"):
            cfg.validated()

    def test_missing_keys_rejected(self):
        cfg = ExperimentConfig(Experiment.LOSS_SWEEP, {"k": 1}, "x.csv")
        with pytest.raises(ValueError, match="missing"):
            cfg.validated()

    def test_every_catalog_default_revalidates(self):
        for fid, spec in CATALOG.items():
            spec.config("out").validated()


class TestCatalog:
    def test_at_least_twelve_entries(self):
        assert len(CATALOG) >= 12

    def test_coverage_of_named_panels(self):
        ids = set(CATALOG)
        for fid in ("fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b",
                    "fig5a", "fig5b", "fig6a", "fig6b", "appendix-fig7",
                    "appendix-fig11a"):
            assert fid in ids

    def test_fig5a_declares_contour(self):
        assert CATALOG["fig5a"].defaults.get("contour") is True
        assert CATALOG["fig5a"].defaults["k"] == 2

    def test_unknown_figure_id(self):
        with pytest.raises(KeyError):
            run_figure("fig99")


class TestCsvAndManifest:
    def test_atomic_write_and_format(self, tmp_path):
        path = str(tmp_path / "t.csv")
        write_csv(path, ["a", "b"], [[1, 0.123456789], [2, 3.0]])
        lines = open(path).read().splitlines()
        assert lines[0] == "a,b"
        assert lines[1] == "1,0.123457"  # six significant digits
        assert not [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]

    def test_failed_write_leaves_no_partial_file(self, tmp_path):
        path = str(tmp_path / "t.csv")

        def bad_rows():
            yield [1, 2]
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError):
            write_csv(path, ["a", "b"], bad_rows())
        assert not os.path.exists(path)
        assert not [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]

    def test_run_writes_manifest_with_version_and_seed(self, tmp_path):
        out = str(tmp_path / "loss.csv")
        cfg = ExperimentConfig(
            Experiment.LOSS_SWEEP,
            {"k": 1, "p": 0.5, "n": 4, "samples": 50, "seed": 31,
             "alpha_points": 2},
            out)
        manifest = run(cfg, figure_id="custom")
        assert os.path.exists(out)
        entry = json.loads(open(str(tmp_path / "manifests.jsonl")).read())
        assert entry["figure_id"] == "custom"
        assert entry["parameters"]["seed"] == 31
        assert entry["tool_version"] == manifest.tool_version
        assert entry["wall_time_s"] >= 0

    def test_seeded_rerun_is_byte_identical(self, tmp_path):
        params = {"k": 1, "p": 0.5, "n": 6, "samples": 400, "seed": 7,
                  "alpha_points": 3}
        out1 = str(tmp_path / "a.csv")
        out2 = str(tmp_path / "b.csv")
        run(ExperimentConfig(Experiment.LOSS_SWEEP, dict(params), out1), "x")
        run(ExperimentConfig(Experiment.LOSS_SWEEP, dict(params), out2), "x")
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_steady_grid_csv_schema(self, tmp_path):
        out = str(tmp_path / "grid.csv")
        cfg = ExperimentConfig(
            Experiment.STEADY_GRID,
            {"k": 1, "alpha_min": 0.3, "alpha_points": 3, "beta_points": 3},
            out)
        run(cfg, "fig4a")
        header = open(out).readline().strip()
        assert header == "alpha,beta,E_infinity,residual,kernel_dim"

    def test_contour_file_written_for_k2(self, tmp_path):
        out = str(tmp_path / "g.csv")
        cfg = ExperimentConfig(
            Experiment.STEADY_GRID,
            {"k": 2, "alpha_min": 0.3, "alpha_points": 5, "beta_points": 5,
             "contour": True},
            out)
        run(cfg, "fig5a")
        contour = str(tmp_path / "g_contour.csv")
        assert os.path.exists(contour)
        assert open(contour).readline().strip() == "segment,alpha,beta"


class TestCli:
    def test_list_json(self, capsys):
        assert main(["list", "--json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert any(r["figure_id"] == "fig3b" for r in rows)

    def test_single_copy_command(self, capsys):
        assert main(["single-copy", "--k", "1", "--alpha", "1.0",
                     "--beta", "0"]) == 0
        out = capsys.readouterr().out
        assert "E = 1" in out

    def test_steady_state_command(self, capsys):
        assert main(["steady-state", "--k", "1", "--alpha", "1.0",
                     "--beta", "1.0"]) == 0
        assert "E_infinity = 1" in capsys.readouterr().out

    def test_steady_state_degenerate_errors_cleanly(self, capsys):
        assert main(["steady-state", "--k", "1", "--alpha", "0"]) == 2
        err = capsys.readouterr().err
        assert json.loads(err)["error"]

    def test_loss_mc_command(self, tmp_path, capsys):
        out = str(tmp_path / "mc.csv")
        rc = main(["loss-mc", "--k", "1", "--alpha", "1.0", "--family", "swap",
                   "--p", "0.5", "--n", "6", "--samples", "200",
                   "--seed", "3", "--out", out])
        assert rc == 0
        assert os.path.exists(out)
        header = open(out).readline().strip()
        assert header == ("k,alpha_over_pi,family,E_threshold,q_hat,stderr,"
                          "n,M,p,seed")

    def test_figure_command_with_overrides(self, tmp_path, capsys):
        rc = main(["figure", "fig4b", "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "fig4b.csv").exists()
        assert (tmp_path / "manifests.jsonl").exists()

    def test_figure_rejects_unknown_id(self, capsys):
        assert main(["figure", "nope"]) == 2
        assert "nope" in json.loads(capsys.readouterr().err)["error"]

    def test_oracle_check_command(self, tmp_path, capsys):
        rc = main(["oracle-check", "--p", "0.5", "--n", "6",
                   "--samples", "400",
                   "--out", str(tmp_path / "oc.csv")])
        assert rc == 0
        assert "all pass" in capsys.readouterr().out

    def test_config_file_parsing(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "figure_id = \"fig4b\"  # which panel\n"
            "steps = 4\n"
            "alphas = [0.5, 1.0]\n"
            "k = 1\n"
        )
        parsed = load_config_file(str(cfg))
        assert parsed == {"figure_id": "fig4b", "steps": 4,
                          "alphas": [0.5, 1.0], "k": 1}

    def test_figure_via_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("figure_id = \"fig4b\"\nsteps = 4\n")
        rc = main(["figure", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "fig4b.csv").exists()

    def test_entry_point_runs(self):
        proc = subprocess.run([sys.executable, "-m", "entbuffer.cli", "list"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "fig2a" in proc.stdout
