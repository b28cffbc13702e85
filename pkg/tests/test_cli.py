#!/usr/bin/env python3

import json
from unittest.mock import patch

import numpy as np
import pytest

from cli import build_parser, ladder, run, run_config
from decision import Decision, DynamicsOutcome, FlowOutcome
from diophantine import OracleResult, parse
from fock import build_instance, coherent_state, operators
from models import Verdict, VerdictStatus
from serialization import operator_from_dict, state_from_dict


def inconclusive_decision(p, cutoffs, config=None):
    verdict = Verdict(
        status=VerdictStatus.INCONCLUSIVE, witness=None, e0_flow=None, e0_oracle=1,
        dynamics_identified=None, cutoffs=tuple(cutoffs), diagnostics=("flow failed: StepLimitExceeded",),
    )
    return Decision(verdict=verdict, oracle=OracleResult(1, [(0,)]), flow=FlowOutcome(error="x"), dynamics=DynamicsOutcome())


class TestArguments:
    """Argument parsing and RunConfig construction."""

    def test_ladder_syntax(self):
        """Rungs split on ';', modes on ','."""
        assert ladder("2;4;8") == ((2,), (4,), (8,))
        assert ladder("2,2;4,4") == ((2, 2), (4, 4))

    def test_run_config(self):
        """Flags land in the nested configs."""
        args = build_parser().parse_args([
            "decide", "--poly", "x1 - 3", "--cutoffs", "4", "--tol", "1e-4", "--m", "4",
            "--alphas", "1,0.5j", "--schedule", "smooth", "--max-rounds", "3",
        ])
        config = run_config(args)
        assert config.command == "decide"
        assert config.cutoffs == (4,)
        assert config.decision.solver.flow_tol == 1e-4
        assert config.decision.solver.tracked_states == 4
        assert config.decision.solver.max_rounds == 3
        assert config.decision.alphas == (1 + 0j, 0.5j)
        assert config.decision.schedule == "smooth"

    def test_missing_subcommand(self, capsys):
        """Usage errors exit 1 with the synopsis on stderr."""
        assert run([]) == 1
        assert "usage" in capsys.readouterr().err

    def test_bad_cutoffs(self, capsys):
        """Non-integer cutoffs are a usage error."""
        assert run(["oracle", "--poly", "x1", "--cutoffs", "a"]) == 1

    def test_help(self, capsys):
        """--help is not an error."""
        assert run(["decide", "--help"]) == 0
        assert "--poly" in capsys.readouterr().out


class TestCommands:
    """Subcommand output and exit codes."""

    def test_parse(self, capsys):
        """parse prints the canonical form."""
        assert run(["parse", "--poly", "(x1 + 1)^2"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["polynomial"] == "x1^2 + 2*x1 + 1"
        assert data["num_vars"] == 1
        assert data["degree"] == 2

    def test_oracle(self, capsys):
        """oracle JSON is exactly min and witnesses."""
        assert run(["oracle", "--poly", "(x1+1)^2", "--cutoffs", "8"]) == 0
        assert json.loads(capsys.readouterr().out) == {"min": 1, "witnesses": [[0]]}

    def test_oracle_default_cutoffs(self, capsys):
        """Eight per mode when --cutoffs is omitted."""
        assert run(["oracle", "--poly", "x1 - 8"]) == 0
        assert json.loads(capsys.readouterr().out) == {"min": 0, "witnesses": [[8]]}

    def test_syntax_error(self, capsys):
        """A dangling operator exits 1 and names the position."""
        assert run(["decide", "--poly", "x1 +"]) == 1
        assert "position 4" in capsys.readouterr().err

    def test_cutoff_arity(self, capsys):
        """Cutoff count must match the number of variables."""
        assert run(["oracle", "--poly", "x1 + x2", "--cutoffs", "3"]) == 1
        assert "cutoffs" in capsys.readouterr().err

    def test_inconclusive_exit_code(self, capsys):
        """An inconclusive verdict exits 2."""
        with patch("cli.run_decision", side_effect=inconclusive_decision):
            assert run(["decide", "--poly", "(x1 + 1)^2"]) == 2
        data = json.loads(capsys.readouterr().out)
        assert list(data) == ["status", "witness", "e0_flow", "e0_oracle", "dynamics_identified", "cutoffs", "diagnostics"]
        assert data["status"] == "Inconclusive"
        assert data["cutoffs"] == [8]

    def test_flow_trace_and_out(self, tmp_path):
        """flow writes JSON to --out and the path to <prefix>_flow.csv."""
        out = tmp_path / "flow.json"
        prefix = tmp_path / "run"
        code = run(["flow", "--poly", "(x1 + 1)^2", "--cutoffs", "6", "--m", "3", "--out", str(out), "--trace", str(prefix)])
        assert code == 0
        data = json.loads(out.read_text())
        assert data["snapped"] == 1
        assert data["confident"] is True
        assert data["e0_final"] == pytest.approx(1.0, abs=1e-6)
        lines = (tmp_path / "run_flow.csv").read_text().splitlines()
        assert lines[0] == "s,E_0,E_1,E_2,gap_floor,step,N"

    def test_evolve_trace(self, tmp_path, capsys):
        """evolve writes sample rows to <prefix>_evolve.csv."""
        prefix = tmp_path / "run"
        code = run(["evolve", "--poly", "x1 - 1", "--cutoffs", "4", "--tau", "1", "--steps", "400", "--trace", str(prefix)])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert data["steps"] == 400
        assert len(data["top_occupations"]) == 5
        rows = (tmp_path / "run_evolve.csv").read_text().splitlines()
        assert rows[0] == "t,norm,ground_candidate_occupation"
        assert len(rows) == 202

    def test_dump(self, tmp_path, capsys):
        """--dump writes operators and the initial state in row-major pairs."""
        dump = tmp_path / "dump.json"
        assert run(["evolve", "--poly", "x1 - 1", "--cutoffs", "2", "--tau", "0.1", "--steps", "10", "--dump", str(dump)]) == 0
        data = json.loads(dump.read_text())
        assert list(data) == ["h_i", "h_p", "initial_state"]
        assert data["h_p"]["dim"] == 3
        assert data["h_p"]["cutoffs"] == [2]
        assert len(data["h_p"]["entries"]) == 9
        assert data["h_p"]["entries"][0] == [1.0, 0.0]
        assert len(data["initial_state"]["entries"]) == 3

    def test_dump_reloads(self, tmp_path):
        """The dumped layout reads back into the same operators and state."""
        dump = tmp_path / "dump.json"
        assert run(["evolve", "--poly", "x1 - 1", "--cutoffs", "3", "--tau", "0.1", "--steps", "10", "--dump", str(dump)]) == 0
        data = json.loads(dump.read_text())
        instance = build_instance(parse("x1 - 1"), (3,))
        ops = operators(instance)
        h_i = operator_from_dict(data["h_i"])
        h_p = operator_from_dict(data["h_p"])
        assert h_i.cutoffs == (3,)
        assert np.array_equal(h_i.entries, ops.h_i.entries)
        assert np.array_equal(h_p.entries, ops.h_p.entries)
        state = state_from_dict(data["initial_state"])
        assert state.basis == instance.basis
        assert np.array_equal(state.amplitudes, coherent_state(instance.alphas, instance.basis).amplitudes)

    def test_sweep_without_rounds_is_inconclusive(self, capsys):
        """No identification exits 2."""
        assert run(["sweep", "--poly", "x1 - 1", "--cutoffs", "4", "--max-rounds", "0"]) == 2
        assert json.loads(capsys.readouterr().out)["identified"] is None

    def test_study_requires_ladder(self, capsys):
        """study without --ladder is a usage error."""
        assert run(["study", "--poly", "x1 - 3"]) == 1

    def test_deterministic_output(self, tmp_path):
        """The same arguments produce byte-identical JSON."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        args = ["flow", "--poly", "(x1 + 1)^2", "--cutoffs", "6", "--m", "3"]
        assert run(args + ["--out", str(first)]) == 0
        assert run(args + ["--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    @pytest.mark.slow
    def test_decide_pythagorean(self, capsys):
        """The Pythagorean fixture is solvable from the command line."""
        code = run(["decide", "--poly", "x1^2 + x2^2 - 25", "--cutoffs", "6,6", "--tol", "1e-3", "--max-rounds", "4"])
        data = json.loads(capsys.readouterr().out)
        assert data["status"] == "SolvableWithWitness"
        assert data["witness"] == [3, 4]
        assert code == 0

    @pytest.mark.slow
    def test_decide_deterministic(self, tmp_path):
        """Full decisions are reproducible byte for byte."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        args = ["decide", "--poly", "x1 - 3", "--cutoffs", "2"]
        run(args + ["--out", str(first)])
        run(args + ["--out", str(second)])
        assert first.read_bytes() == second.read_bytes()
