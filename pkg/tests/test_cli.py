"""
Tests for the command-line front end.
"""

import io
import json
import math

import pandas as pd
import pytest

from src.main import (CACHE_ENV_VAR, EXIT_OK, EXIT_USAGE, build_parser, default_config, load_config,
                      RunConfig, run_cli)


def _run(capsys, *argv):
    code = run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestCommands:
    """Test cases for the subcommands."""

    def test_mrs(self, capsys, tmp_path):
        """a_24 = 2 for Q = x^4."""
        code, out, _ = _run(capsys, "mrs", "--weight", "freud:4", "--t", "24", "--cache-dir", str(tmp_path))
        assert code == EXIT_OK
        assert float(out) == pytest.approx(2.0, abs=1e-10)
        assert (tmp_path / "mrs.json").exists()

    def test_mrs_json(self, capsys, tmp_path):
        code, out, _ = _run(capsys, "mrs", "--weight", "freud:2", "--t", "16", "--format", "json",
                            "--cache-dir", str(tmp_path))
        assert code == EXIT_OK
        record = json.loads(out)
        assert record['weight'] == "freud:2"
        assert record['a'] == pytest.approx(4.0, rel=1e-12)

    def test_recur_writes_cache(self, capsys, tmp_path):
        """recur stores <cache-dir>/<weight>/<N>.json and prints k, A, B."""
        code, out, _ = _run(capsys, "recur", "--weight", "freud:2", "--N", "8", "--cache-dir", str(tmp_path))
        assert code == EXIT_OK
        assert (tmp_path / "freud:2" / "8.json").exists()
        frame = pd.read_csv(io.StringIO(out))
        assert list(frame.columns) == ['k', 'A', 'B']
        assert len(frame) == 9

    def test_cache_hit_reproduces_output(self, capsys, tmp_path):
        """A second run served from the cache prints the same bytes."""
        argv = ("recur", "--weight", "erdos:1:2", "--N", "12", "--cache-dir", str(tmp_path))
        _, first, _ = _run(capsys, *argv)
        _, second, _ = _run(capsys, *argv)
        assert first == second

    def test_nodes(self, capsys, tmp_path):
        """Nodes are listed by descending label, x_{1,n} the largest."""
        code, out, _ = _run(capsys, "nodes", "--weight", "freud:2", "--n", "2", "--cache-dir", str(tmp_path))
        assert code == EXIT_OK
        frame = pd.read_csv(io.StringIO(out))
        assert frame['node'].tolist() == pytest.approx([0.5, -0.5], rel=1e-12)
        assert frame['weight'].sum() == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-12)

    def test_expand(self, capsys, tmp_path):
        code, out, _ = _run(capsys, "expand", "--weight", "freud:2", "--f", "sgn", "--N", "6",
                            "--cache-dir", str(tmp_path))
        assert code == EXIT_OK
        frame = pd.read_csv(io.StringIO(out))
        assert frame['k'].tolist() == list(range(6))
        assert (frame['c'][0::2] == 0.0).all()

    def test_kernel(self, capsys, tmp_path):
        code, out, _ = _run(capsys, "kernel", "--weight", "freud:2", "--n", "4", "--x", "0.3", "--t", "0.3",
                            "--cache-dir", str(tmp_path))
        assert code == EXIT_OK
        assert float(out) > 0.0

    def test_converge(self, capsys, tmp_path):
        """One CSV row per n with finite errors."""
        code, out, _ = _run(capsys, "converge", "--weight", "erdos:1:2", "--f", "sgn", "--x", "1",
                            "--n", "8,16,32", "--cache-dir", str(tmp_path))
        assert code == EXIT_OK
        frame = pd.read_csv(io.StringIO(out))
        assert frame['n'].tolist() == [8, 16, 32]
        assert frame['abs_error'].map(math.isfinite).all()

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "out" / "mrs.txt"
        code, out, _ = _run(capsys, "mrs", "--weight", "freud:2", "--t", "4", "--output", str(target),
                            "--cache-dir", str(tmp_path))
        assert code == EXIT_OK
        assert out == ""
        assert float(target.read_text()) == pytest.approx(2.0, rel=1e-12)


class TestErrors:
    """Test cases for exit codes and messages."""

    def test_alpha_not_above_one(self, capsys, tmp_path):
        code, _, err = _run(capsys, "mrs", "--weight", "freud:0.5", "--t", "1", "--cache-dir", str(tmp_path))
        assert code == EXIT_USAGE
        assert "alpha" in err

    def test_unknown_weight(self, capsys, tmp_path):
        """Unknown descriptors show the grammar."""
        code, _, err = _run(capsys, "mrs", "--weight", "gauss", "--t", "1", "--cache-dir", str(tmp_path))
        assert code == EXIT_USAGE
        assert "freud:<alpha>" in err

    def test_missing_arguments(self, capsys):
        code, _, _ = _run(capsys, "mrs", "--t", "1")
        assert code == EXIT_USAGE

    def test_bad_lists(self, capsys, tmp_path):
        code, _, _ = _run(capsys, "converge", "--weight", "freud:2", "--f", "sgn", "--x", "a",
                          "--n", "8", "--cache-dir", str(tmp_path))
        assert code == EXIT_USAGE
        code, _, _ = _run(capsys, "nodes", "--weight", "freud:2", "--n", "0", "--cache-dir", str(tmp_path))
        assert code == EXIT_USAGE


class TestConfiguration:
    """Test cases for config loading and precedence."""

    def test_missing_file_falls_back(self, tmp_path):
        config = load_config(tmp_path / "missing.yaml")
        assert config == default_config()

    def test_yaml_overrides(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("theorem:\n  delta: 0.25\nrun:\n  format: json\n")
        config = load_config(path)
        assert config['theorem']['delta'] == 0.25
        assert config['theorem']['c1'] == 1.0
        assert config['run']['format'] == "json"

    def test_malformed_file_falls_back(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("- just\n- a list\n")
        assert load_config(path) == default_config()

    def test_cache_dir_precedence(self, monkeypatch, tmp_path):
        """--cache-dir beats the environment, which beats the config file."""
        parser = build_parser()
        config = default_config()
        monkeypatch.setenv(CACHE_ENV_VAR, str(tmp_path / "env"))
        args = parser.parse_args(["mrs", "--weight", "freud:2", "--t", "1"])
        assert RunConfig.from_args(args, config).cache_dir == tmp_path / "env"
        args = parser.parse_args(["mrs", "--weight", "freud:2", "--t", "1", "--cache-dir", str(tmp_path)])
        assert RunConfig.from_args(args, config).cache_dir == tmp_path
        monkeypatch.delenv(CACHE_ENV_VAR)
        args = parser.parse_args(["mrs", "--weight", "freud:2", "--t", "1"])
        assert str(RunConfig.from_args(args, config).cache_dir) == ".orthoseries_cache"

    def test_seed_override(self):
        parser = build_parser()
        args = parser.parse_args(["verify-lemmas", "--weight", "freud:2", "--n", "8", "--seed", "7"])
        run = RunConfig.from_args(args, default_config())
        assert run.suite.seed == 7
        assert run.n_list == [8]


class TestDemo:
    """Smoke tests for the demo script."""

    def test_demo_sections(self, capsys, mrs_cache):
        import demo
        demo.demo_mrs_numbers(mrs_cache)
        demo.demo_recurrence(mrs_cache, N=16)
        demo.demo_convergence(mrs_cache, n_list=(8, 16))
        out = capsys.readouterr().out
        assert "a_24=2.000000000000" in out
        assert "n=16" in out
