import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest
import yaml

from ncvxkit.bench import (
    ExperimentConfig,
    emit_traces,
    list_solvers,
    parse_results_csv,
    run_suite,
)
from ncvxkit.bench.cli import main as cli_main
from ncvxkit.exceptions import ConfigError


def make_config(**overrides):
    raw = {
        "schema_version": 1,
        "problem": "sparse",
        "size": {"n": 60, "p": 40, "s": 3, "sigma": 0.0, "design": "gaussian"},
        "seeds": [0, 1],
        "solvers": [{"name": "iht", "options": {"eta": 0.5, "T": 200}}],
    }
    raw.update(overrides)
    return ExperimentConfig.from_dict(raw)


class TestConfig:
    def test_yaml_parse(self):
        text = """
schema_version: 1
problem: robust
size: {n: 100, p: 5, k: 3}
seeds: [7]
solvers:
  - name: amrr
  - name: robust_gpgd
    options: {T: 50}
"""
        cfg = ExperimentConfig.from_yaml(text)
        assert cfg.problem == "robust"
        assert cfg.solvers[1].options == {"T": 50}

    def test_rejects_bad_version(self):
        with pytest.raises(ConfigError):
            make_config(schema_version=99)

    def test_rejects_empty_seeds(self):
        with pytest.raises(ConfigError):
            make_config(seeds=[])

    def test_unknown_problem_or_solver(self):
        with pytest.raises(ConfigError, match="unknown problem"):
            run_suite(make_config(problem="knapsack"))
        with pytest.raises(ConfigError, match="unknown solver"):
            run_suite(make_config(solvers=[{"name": "lasso"}]))

    def test_list_solvers(self):
        assert list_solvers("phase") == ["gsam", "wf"]
        with pytest.raises(ConfigError):
            list_solvers("sudoku")


class TestRunSuite:
    def test_one_row_per_pair(self):
        cfg = make_config(seeds=[5])
        rows, traces = run_suite(cfg)
        assert len(rows) == 1
        assert rows[0].solver == "iht" and rows[0].seed == 5
        assert ("iht", 5) in traces

    def test_determinism_across_runs(self):
        cfg = make_config()
        rows1, _ = run_suite(cfg)
        rows2, _ = run_suite(cfg)
        assert [r.final_error for r in rows1] == [r.final_error for r in rows2]
        assert [r.iterations for r in rows1] == [r.iterations for r in rows2]

    def test_rows_sorted_by_solver_then_seed(self):
        cfg = ExperimentConfig.from_dict({
            "schema_version": 1,
            "problem": "robust",
            "size": {"n": 80, "p": 4, "k": 3},
            "seeds": [3, 1],
            "solvers": [{"name": "robust_gpgd"}, {"name": "amrr"}],
        })
        rows, _ = run_suite(cfg)
        keys = [(r.solver, r.seed) for r in rows]
        assert keys == sorted(keys)

    def test_parallel_jobs_match_serial(self):
        cfg = make_config(seeds=[0, 1, 2, 3])
        serial, _ = run_suite(cfg, jobs=1)
        parallel, _ = run_suite(cfg, jobs=2)
        assert [r.final_error for r in serial] == [r.final_error for r in parallel]

    @pytest.mark.parametrize("problem,size,solver", [
        ("arm", {"m": 12, "n": 12, "r": 2, "k": 260}, "svp"),
        ("completion", {"m": 30, "n": 30, "r": 1, "p_sample": 0.5}, "ammc"),
        ("phase", {"n": 400, "p": 8}, "wf"),
        ("gmm", {"n": 120, "p": 2}, "em"),
        ("gmm", {"n": 120, "p": 2}, "amlvm"),
        ("mixreg", {"n": 200, "p": 3}, "em"),
        ("tensor", {"p": 6, "r": 2}, "decompose"),
    ])
    def test_each_problem_runs(self, problem, size, solver):
        cfg = ExperimentConfig.from_dict({
            "schema_version": 1,
            "problem": problem,
            "size": size,
            "seeds": [0],
            "solvers": [{"name": solver}],
        })
        rows, _ = run_suite(cfg)
        assert len(rows) == 1
        assert rows[0].final_error >= 0
        assert rows[0].wall_seconds >= 0

    def test_iht_walltime_subquadratic_in_p(self):
        # qualitative scalability: log-log slope of wall time vs p <= 1.5
        s = 20
        times, ps = [], [500, 1000, 2000]
        for p in ps:
            n = math.ceil(2 * s * math.log(p))
            cfg = ExperimentConfig.from_dict({
                "schema_version": 1,
                "problem": "sparse",
                "size": {"n": n, "p": p, "s": s},
                "seeds": [0],
                "solvers": [{"name": "iht", "options": {"eta": 0.5, "T": 300}}],
            })
            rows, _ = run_suite(cfg)
            times.append(max(rows[0].wall_seconds, 1e-6))
        slope = np.polyfit(np.log(ps), np.log(times), 1)[0]
        assert slope <= 1.5


class TestJobsEnvVar:
    def test_default_jobs_reads_env(self, monkeypatch):
        from ncvxkit.bench.runner import JOBS_ENV_VAR, default_jobs

        monkeypatch.setenv(JOBS_ENV_VAR, "3")
        assert default_jobs() == 3
        monkeypatch.setenv(JOBS_ENV_VAR, "not-a-number")
        assert default_jobs() == 1
        monkeypatch.delenv(JOBS_ENV_VAR)
        assert default_jobs() == 1


class TestEmit:
    def test_header_exact_and_roundtrip(self, tmp_path):
        cfg = make_config()
        rows, traces = run_suite(cfg)
        main = emit_traces(rows, traces, format="csv", path=tmp_path)
        text = Path(main).read_text().splitlines()
        assert text[0] == "problem,solver,seed,n,p,s,r,k,iterations,final_error,wall_seconds,converged"
        back = parse_results_csv(main)
        assert back == [r.as_record() for r in rows]

    def test_empty_rows_header_only(self, tmp_path):
        main = emit_traces([], {}, format="csv", path=tmp_path)
        lines = Path(main).read_text().splitlines()
        assert len(lines) == 1

    def test_trace_sidecars(self, tmp_path):
        cfg = make_config(seeds=[4])
        rows, traces = run_suite(cfg)
        emit_traces(rows, traces, format="csv", path=tmp_path)
        side = tmp_path / "iht_4_trace.csv"
        lines = side.read_text().splitlines()
        assert lines[0] == "iteration,objective,error,elapsed"
        assert len(lines) == rows[0].iterations + 1

    def test_json_validates_against_schema(self, tmp_path):
        import ncvxkit.bench

        cfg = make_config()
        rows, traces = run_suite(cfg)
        main = emit_traces(rows, traces, format="json", path=tmp_path)
        payload = json.loads(Path(main).read_text())
        schema_path = Path(ncvxkit.bench.__file__).parent / "schema.json"
        schema = json.loads(schema_path.read_text())
        jsonschema.validate(payload, schema)

    def test_error_columns_bitwise_identical_across_reruns(self, tmp_path):
        cfg = make_config()
        for sub in ("a", "b"):
            rows, traces = run_suite(cfg)
            emit_traces(rows, traces, format="csv", path=tmp_path / sub)
        col = lambda p: [line.split(",")[9] for line in Path(p, "results.csv").read_text().splitlines()[1:]]
        assert col(tmp_path / "a") == col(tmp_path / "b")


class TestCli:
    def write_config(self, tmp_path, raw):
        path = tmp_path / "exp.yaml"
        path.write_text(yaml.safe_dump(raw))
        return str(path)

    def good_raw(self):
        return {
            "schema_version": 1,
            "problem": "sparse",
            "size": {"n": 50, "p": 30, "s": 3},
            "seeds": [0],
            "solvers": [{"name": "iht", "options": {"eta": 0.5, "T": 100}}],
        }

    def test_run_success(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path, self.good_raw())
        code = cli_main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 0
        assert (tmp_path / "out" / "results.csv").exists()

    def test_config_error_exit_code(self, tmp_path, capsys):
        raw = self.good_raw()
        raw["solvers"] = [{"name": "omp"}]
        cfg = self.write_config(tmp_path, raw)
        code = cli_main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 2
        err = capsys.readouterr().err
        report = json.loads(err.strip().splitlines()[-1])
        assert report["error"] == "config"

    def test_missing_config_file(self, tmp_path, capsys):
        code = cli_main(["run", "--config", str(tmp_path / "nope.yaml"),
                         "--out", str(tmp_path / "out")])
        assert code == 2

    def test_run_failure_exit_code(self, tmp_path, capsys):
        raw = self.good_raw()
        # k >= n/2 in the generator: a run-time failure, not a config error
        raw["problem"] = "robust"
        raw["size"] = {"n": 10, "p": 2, "k": 6}
        raw["solvers"] = [{"name": "amrr"}]
        cfg = self.write_config(tmp_path, raw)
        code = cli_main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 1
        report = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert report["error"] == "run"

    def test_list_solvers(self, capsys):
        assert cli_main(["list-solvers", "--problem", "robust"]) == 0
        out = capsys.readouterr().out.split()
        assert out == ["amrr", "robust_gpgd"]

    def test_json_format(self, tmp_path):
        cfg = self.write_config(tmp_path, self.good_raw())
        code = cli_main(["run", "--config", cfg, "--out", str(tmp_path / "out"),
                         "--format", "json"])
        assert code == 0
        assert (tmp_path / "out" / "results.json").exists()
