import json

import pytest

from brwllt import cli
from brwllt.harness import (
    DEFAULT_THRESHOLDS,
    EXPERIMENTS,
    admissible_z,
    load_config,
    load_config_file,
    run_experiment,
    write_csv,
)

LAW_1D_LAZY = {"d": 1, "zeta0": 0.5, "axes": [[0.5]]}
LAW_1D_SIMPLE = {"d": 1, "zeta0": 0.0, "axes": [[1.0]]}


def base_doc(experiment, **extra):
    doc = {"experiment": experiment, "step_law": dict(LAW_1D_LAZY), "base_seed": 7}
    doc.update(extra)
    return doc


class TestConfig:
    def test_minimal(self):
        cfg = load_config(base_doc("identities"))
        assert cfg.experiment == "identities"
        assert cfg.law.d == 1
        assert cfg.z_set == ((0,),)
        assert cfg.kappa == 0.15
        assert cfg.thresholds == DEFAULT_THRESHOLDS

    def test_unknown_experiment(self):
        with pytest.raises(ValueError):
            load_config(base_doc("nonsense"))

    def test_kappa_gate(self):
        for bad in (0.0, 1.0 / 6.0, 0.3, -0.1):
            with pytest.raises(ValueError):
                load_config(base_doc("identities", kappa=bad))
        cfg = load_config(base_doc("identities", kappa=0.1))
        assert cfg.kappa == 0.1

    def test_z_dimension_gate(self):
        with pytest.raises(ValueError):
            load_config(base_doc("identities", z_set=[[0, 0]]))

    def test_brw_requires_offspring(self):
        with pytest.raises(ValueError):
            load_config(base_doc("brw-check", n_values=[4]))

    def test_count_width_gate(self):
        with pytest.raises(ValueError):
            load_config(base_doc("identities", count_width=32))

    def test_threshold_override(self):
        cfg = load_config(base_doc("identities", thresholds={"identity_rel_err": 1e-6}))
        assert cfg.thresholds["identity_rel_err"] == 1e-6
        assert cfg.thresholds["cf_agreement"] == 1e-9

    def test_hash_stable_and_order_independent(self):
        a = load_config({"experiment": "identities", "step_law": LAW_1D_LAZY, "base_seed": 7})
        b = load_config({"base_seed": 7, "step_law": LAW_1D_LAZY, "experiment": "identities"})
        assert a.config_hash == b.config_hash
        c = load_config(base_doc("identities", base_seed=8))
        assert a.config_hash != c.config_hash

    def test_load_config_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(base_doc("identities")))
        assert load_config_file(path).experiment == "identities"


class TestAdmissibleZ:
    def test_filter(self):
        cfg = load_config(
            base_doc("llt-check", kappa=0.15, z_set=[[0], [1], [5]], z_radius_constant=1.0)
        )
        assert admissible_z(cfg, 16) == [(0,), (1,)]
        # 5 <= n^0.15 requires n >= 5^(1/0.15), far beyond this range
        assert admissible_z(cfg, 1000) == [(0,), (1,)]

    def test_constant_scales_cap(self):
        cfg = load_config(
            base_doc("llt-check", kappa=0.15, z_set=[[5]], z_radius_constant=4.0)
        )
        assert admissible_z(cfg, 16) == [(5,)]


class TestRunners:
    def test_llt_check(self):
        cfg = load_config(
            base_doc("llt-check", n_values=[16, 64], z_set=[[0], [1]], kappa=0.15)
        )
        res = run_experiment(cfg)
        assert res.passed
        assert res.columns[0] == "n"
        assert any(r[0] == 16 for r in res.rows)

    def test_coeff_fit(self):
        cfg = load_config(base_doc("coeff-fit", n_values=[64, 128, 256], z_set=[[0]]))
        res = run_experiment(cfg)
        assert res.passed
        verdicts = [r for r in res.rows if r[0] == "verdict"]
        assert len(verdicts) == 1
        assert verdicts[0][-1] in ("theorem", "flipped")

    def test_identities(self):
        res = run_experiment(load_config(base_doc("identities")))
        assert res.passed
        assert len(res.rows) == 13
        assert all(err <= 1e-8 for _, err in res.rows)

    def test_martingale_check(self):
        cfg = load_config(
            base_doc("martingale-check", offspring={"2": 1.0}, replicates=50, n_values=[10])
        )
        res = run_experiment(cfg)
        assert res.passed
        kinds = {r[0] for r in res.rows}
        assert kinds == {"harmonicity", "one-step", "trajectory"}

    def test_brw_check_shape(self):
        cfg = load_config(
            base_doc(
                "brw-check",
                offspring={"2": 1.0},
                replicates=8,
                n_values=[8, 16],
                n_est=16,
                z_set=[[0]],
            )
        )
        res = run_experiment(cfg)
        assert res.columns[:2] == ("replicate", "n")
        per_rep = [r for r in res.rows if r[0] != "agg"]
        assert len(per_rep) == 8 * 2
        aggs = [r for r in res.rows if r[0] == "agg"]
        assert len(aggs) == 2

    def test_unknown_runner_rejected(self):
        assert set(EXPERIMENTS) == {
            "llt-check",
            "coeff-fit",
            "identities",
            "martingale-check",
            "brw-check",
        }


class TestCsvAndDeterminism:
    def test_csv_header(self, tmp_path):
        cfg = load_config(base_doc("identities"))
        res = run_experiment(cfg)
        path = tmp_path / "out.csv"
        write_csv(cfg, res, path)
        lines = path.read_text().splitlines()
        assert lines[0] == f"# config_hash={cfg.config_hash}"
        assert lines[1].startswith("# tool_version=")
        assert lines[2] == "# base_seed=7"
        assert lines[3] == "# experiment=identities"
        assert lines[4] == "# passed=True"
        assert lines[5] == "identity,relative_error"
        assert len(lines) == 6 + 13

    def test_repeated_runs_byte_identical(self, tmp_path):
        doc = base_doc(
            "brw-check",
            offspring={"2": 1.0},
            replicates=6,
            n_values=[6, 12],
            n_est=12,
            z_set=[[0]],
        )
        paths = []
        for tag in ("a", "b"):
            cfg = load_config(json.loads(json.dumps(doc)))
            res = run_experiment(cfg)
            p = tmp_path / f"{tag}.csv"
            write_csv(cfg, res, p)
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestCli:
    def write_cfg(self, tmp_path, doc, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    def test_version(self, capsys):
        assert cli.main(["version"]) == 0
        from brwllt import __version__

        assert capsys.readouterr().out.strip() == __version__

    def test_validate(self, tmp_path, capsys):
        path = self.write_cfg(tmp_path, base_doc("identities"))
        assert cli.main(["validate", path]) == 0
        out = capsys.readouterr().out
        assert "experiment: identities" in out
        assert "ok" in out

    def test_run_writes_csv(self, tmp_path, capsys):
        path = self.write_cfg(tmp_path, base_doc("identities"))
        out = tmp_path / "res.csv"
        assert cli.main(["run", path, "--output", str(out)]) == 0
        assert out.exists()
        assert "passed=True" in capsys.readouterr().out

    def test_run_failure_exit_code(self, tmp_path):
        doc = base_doc("identities", thresholds={"identity_rel_err": 1e-30})
        path = self.write_cfg(tmp_path, doc)
        out = tmp_path / "res.csv"
        assert cli.main(["run", path, "--output", str(out)]) == 1

    def test_override(self, tmp_path, capsys):
        path = self.write_cfg(tmp_path, base_doc("identities"))
        out = tmp_path / "res.csv"
        code = cli.main(
            [
                "run",
                path,
                "--output",
                str(out),
                "--override",
                "thresholds.identity_rel_err=1e-30",
            ]
        )
        assert code == 1

    def test_output_dir_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("BRWLLT_OUTPUT_DIR", str(tmp_path))
        path = self.write_cfg(tmp_path, base_doc("identities", output="env.csv"))
        assert cli.main(["run", path]) == 0
        assert (tmp_path / "env.csv").exists()

    def test_dump_dist(self, tmp_path, capsys):
        doc = base_doc("identities")
        doc["step_law"] = dict(LAW_1D_SIMPLE)
        path = self.write_cfg(tmp_path, doc)
        out = tmp_path / "dist.csv"
        assert cli.main(["dump-dist", path, "--n", "2", "--output", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "z1,probability"
        assert len(lines) == 4  # z in {-2, 0, 2}

    def test_bad_override_form(self, tmp_path):
        path = self.write_cfg(tmp_path, base_doc("identities"))
        with pytest.raises(SystemExit):
            cli.main(["run", path, "--override", "nonsense"])

    def test_invalid_config_propagates(self, tmp_path):
        path = self.write_cfg(tmp_path, base_doc("identities", kappa=0.9))
        with pytest.raises(ValueError):
            cli.main(["validate", path])
