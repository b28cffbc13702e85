#!/usr/bin/env python3

from unittest.mock import patch

import pytest

from decision import (
    Decision,
    DynamicsOutcome,
    FlowOutcome,
    boundary_message,
    choose_witness,
    convergence_study,
    decide,
    merge,
    run_decision,
    validate_ladder,
)
from diophantine import OracleResult, evaluate, lattice_box, parse
from errors import PrecisionOverflowError
from fixtures import FIXTURES
from models import DecisionConfig, SolverConfig, VerdictStatus


class TestWitnessChoice:
    """Which oracle witness the verdict reports."""

    def test_prefers_all_positive(self):
        """(3, 4) beats (0, 5) for the Pythagorean fixture."""
        assert choose_witness([(0, 5), (3, 4), (4, 3), (5, 0)]) == (3, 4)

    def test_falls_back_to_first(self):
        """Without a positive witness the lexicographically first is used."""
        assert choose_witness([(0,), (0,)]) == (0,)


class TestMerge:
    """Pure assembly of component results."""

    def setup_method(self):
        self.p = parse("x1 - 3")
        self.box = lattice_box((2,))
        self.oracle = OracleResult(1, [(2,)])
        self.flow = FlowOutcome(e0=1.0000001, snapped=1, confident=True)
        self.dynamics = DynamicsOutcome(identified=(2,), value=1)

    def test_agreement_gives_no_solution(self):
        """All three components at minimum 1 certify the box."""
        verdict = merge(self.p, self.box, self.oracle, self.flow, self.dynamics)
        assert verdict.status == VerdictStatus.NO_SOLUTION
        assert verdict.witness is None
        assert verdict.e0_oracle == 1
        assert verdict.dynamics_identified == (2,)

    def test_boundary_diagnostic(self):
        """A minimum only on the upper face asks for a larger cutoff."""
        verdict = merge(self.p, self.box, self.oracle, self.flow, self.dynamics)
        assert verdict.diagnostics == (boundary_message(1),)
        assert "escalate cutoff" in verdict.diagnostics[0]

    def test_interior_minimum_has_no_boundary_diagnostic(self):
        """(x1 + 1)^2 is minimized at the origin."""
        p = parse("(x1 + 1)^2")
        verdict = merge(p, lattice_box((8,)), OracleResult(1, [(0,)]), self.flow, DynamicsOutcome(identified=(0,), value=1))
        assert verdict.status == VerdictStatus.NO_SOLUTION
        assert verdict.diagnostics == ()

    def test_flow_failure_is_inconclusive(self):
        """A failed flow demotes the verdict and names itself."""
        verdict = merge(self.p, self.box, self.oracle, FlowOutcome(error="GapCollapse: gap collapse"), self.dynamics)
        assert verdict.status == VerdictStatus.INCONCLUSIVE
        assert verdict.e0_flow is None
        assert any(d.startswith("flow failed") for d in verdict.diagnostics)

    def test_unconfident_flow_is_inconclusive(self):
        """E0 between integers cannot certify anything."""
        flow = FlowOutcome(e0=0.55, snapped=1, confident=False)
        verdict = merge(self.p, self.box, self.oracle, flow, self.dynamics)
        assert verdict.status == VerdictStatus.INCONCLUSIVE
        assert any("snapping accuracy" in d for d in verdict.diagnostics)

    def test_dynamics_without_identification(self):
        """No dominant state leaves the verdict open."""
        verdict = merge(self.p, self.box, self.oracle, self.flow, DynamicsOutcome())
        assert verdict.status == VerdictStatus.INCONCLUSIVE
        assert any("dynamics identified no state" in d for d in verdict.diagnostics)

    def test_dynamics_disagreement_is_named(self):
        """A dynamics value other than the oracle minimum is reported."""
        verdict = merge(self.p, self.box, self.oracle, self.flow, DynamicsOutcome(identified=(1,), value=4))
        assert any("dynamics state has D^2=4" in d for d in verdict.diagnostics)

    def test_dynamics_disagreement_is_inconclusive(self):
        """A dynamics state above the oracle minimum cannot certify the box."""
        verdict = merge(self.p, self.box, self.oracle, self.flow, DynamicsOutcome(identified=(1,), value=4))
        assert verdict.status == VerdictStatus.INCONCLUSIVE

    def test_flow_disagreement_is_inconclusive(self):
        """A confident flow snapped to the wrong integer demotes the verdict."""
        flow = FlowOutcome(e0=2.0, snapped=2, confident=True)
        verdict = merge(self.p, self.box, self.oracle, flow, self.dynamics)
        assert verdict.status == VerdictStatus.INCONCLUSIVE
        assert any("flow snapped to 2 but oracle minimum is 1" in d for d in verdict.diagnostics)

    def test_oracle_root_is_solvable(self):
        """A zero oracle minimum is solvable whatever the other components say."""
        p = parse("x1^2 + x2^2 - 25")
        oracle = OracleResult(0, [(0, 5), (3, 4), (4, 3), (5, 0)])
        verdict = merge(p, lattice_box((6, 6)), oracle, FlowOutcome(error="StepSizeUnderflow: x"), DynamicsOutcome())
        assert verdict.status == VerdictStatus.SOLVABLE
        assert verdict.witness == (3, 4)
        assert evaluate(p, verdict.witness) == 0


class TestDecide:
    """End-to-end verdicts."""

    def test_failures_demote_not_abort(self, quick_config):
        """A crashing flow component yields an inconclusive verdict."""
        with patch("decision.run_flow", return_value=FlowOutcome(error="StepLimitExceeded: budget")), \
             patch("decision.run_dynamics", return_value=DynamicsOutcome(identified=(0,), value=1)):
            verdict = decide(parse("(x1 + 1)^2"), (8,), quick_config)
        assert verdict.status == VerdictStatus.INCONCLUSIVE
        assert verdict.e0_oracle == 1

    def test_construction_errors_propagate(self):
        """Wrong cutoffs are the caller's error."""
        with pytest.raises(ValueError):
            decide(parse("x1 + x2"), (4,))

    def test_precision_overflow_propagates(self):
        """Boxes whose D^2 exceeds 2^53 are refused up front."""
        with pytest.raises(PrecisionOverflowError):
            decide(parse("x1^27"), (2,))

    def test_workers_run_components_concurrently(self, quick_config):
        """Parallel assembly gives the same verdict."""
        parallel = DecisionConfig(solver=SolverConfig(flow_tol=1e-3, max_flow_steps=5000, max_rounds=4, min_steps=200, workers=3))
        with patch("decision.run_dynamics", return_value=DynamicsOutcome(identified=(0,), value=1)):
            serial = decide(parse("(x1 + 1)^2"), (8,), quick_config)
            concurrent = decide(parse("(x1 + 1)^2"), (8,), parallel)
        assert serial == concurrent

    @pytest.mark.slow
    def test_shifted_linear(self):
        """x1 - 1 is solvable with witness (1) and all components agree."""
        decision = run_decision(parse("x1 - 1"), (8,))
        verdict = decision.verdict
        assert verdict.status == VerdictStatus.SOLVABLE
        assert verdict.witness == (1,)
        assert verdict.e0_flow == pytest.approx(0.0, abs=1e-6)
        assert verdict.dynamics_identified == (1,)
        assert verdict.diagnostics == ()

    @pytest.mark.slow
    def test_square_without_root(self):
        """(x1 + 1)^2 has no root in the box; minimum 1 in the interior."""
        verdict = decide(parse("(x1 + 1)^2"), (8,))
        assert verdict.status == VerdictStatus.NO_SOLUTION
        assert verdict.e0_oracle == 1
        assert verdict.e0_flow == pytest.approx(1.0, abs=1e-6)
        assert verdict.dynamics_identified == (0,)
        assert not any("escalate" in d for d in verdict.diagnostics)

    @pytest.mark.slow
    def test_root_outside_small_box(self):
        """x1 - 3 over [0, 2] has no root and the minimum sits on the boundary."""
        verdict = decide(parse("x1 - 3"), (2,))
        assert verdict.status == VerdictStatus.NO_SOLUTION
        assert verdict.dynamics_identified == (2,)
        assert verdict.diagnostics == (boundary_message(1),)

    @pytest.mark.slow
    def test_root_inside_larger_box(self):
        """x1 - 3 over [0, 4] finds x = 3 without a boundary warning."""
        verdict = decide(parse("x1 - 3"), (4,))
        assert verdict.status == VerdictStatus.SOLVABLE
        assert verdict.witness == (3,)
        assert not any("escalate" in d for d in verdict.diagnostics)

    @pytest.mark.slow
    def test_pythagorean(self, quick_config):
        """x1^2 + x2^2 - 25 on (6, 6) reports (3, 4)."""
        verdict = decide(parse("x1^2 + x2^2 - 25"), (6, 6), quick_config)
        assert verdict.status == VerdictStatus.SOLVABLE
        assert verdict.witness == (3, 4)
        assert verdict.e0_oracle == 0


    @pytest.mark.slow
    def test_components_agree_on_fixtures(self):
        """Oracle minimum, snapped flow energy and dynamics D^2 coincide on every bundled fixture."""
        for fixture in FIXTURES:
            decision = run_decision(parse(fixture.polynomial), fixture.cutoffs)
            assert decision.oracle.min_value == fixture.expected_minimum, fixture.name
            assert decision.flow.error is None, fixture.name
            assert decision.flow.confident, fixture.name
            assert decision.flow.snapped == fixture.expected_minimum, fixture.name
            assert decision.dynamics.value == fixture.expected_minimum, fixture.name
            assert decision.verdict.status == fixture.expected_status, fixture.name


class TestConvergenceStudy:
    """Deciding along a cutoff ladder."""

    def test_ladder_must_increase(self):
        """Rungs must grow componentwise and differ."""
        with pytest.raises(ValueError):
            validate_ladder([(4,), (2,)], 1)
        with pytest.raises(ValueError):
            validate_ladder([(2,), (2,)], 1)
        with pytest.raises(ValueError):
            validate_ladder([], 1)
        with pytest.raises(ValueError):
            validate_ladder([(2, 2)], 1)
        assert validate_ladder([[2, 2], [2, 4]], 2) == ((2, 2), (2, 4))

    def test_flip_and_boundary_exit(self):
        """A verdict flip is recorded with the rung where the minimizer leaves the boundary."""
        def fake_decision(p, cutoffs, config=None):
            box = lattice_box(cutoffs)
            d = cutoffs[0]
            oracle = OracleResult(1, [(2,)]) if d < 3 else OracleResult(0, [(3,)])
            flow = FlowOutcome(e0=float(oracle.min_value), snapped=oracle.min_value, confident=True)
            dynamics = DynamicsOutcome(identified=oracle.witnesses[0], value=oracle.min_value)
            verdict = merge(p, box, oracle, flow, dynamics)
            return Decision(verdict=verdict, oracle=oracle, flow=flow, dynamics=dynamics)

        with patch("decision.run_decision", side_effect=fake_decision):
            report = convergence_study(parse("x1 - 3"), [(2,), (4,), (8,)])
        assert [r.status for r in report.rungs] == [
            VerdictStatus.NO_SOLUTION, VerdictStatus.SOLVABLE, VerdictStatus.SOLVABLE,
        ]
        assert report.flips == (1,)
        assert not report.verdict_stable
        assert not report.e0_oracle_stable
        assert report.left_boundary
        assert [r.interior_minimum for r in report.rungs] == [False, True, True]

    @pytest.mark.slow
    def test_stable_square(self):
        """(x1 + 1)^2 stays unsolvable with minimum 1 at an interior point."""
        report = convergence_study(parse("(x1 + 1)^2"), [(2,), (4,), (8,)])
        assert report.verdict_stable
        assert report.e0_oracle_stable
        assert all(r.status == VerdictStatus.NO_SOLUTION for r in report.rungs)
        assert all(r.e0_oracle == 1 and r.interior_minimum for r in report.rungs)
        assert not report.left_boundary

    @pytest.mark.slow
    def test_constant(self):
        """D = 1 has minimum 1 at every rung."""
        report = convergence_study(parse("1"), [(2,), (4,)])
        assert report.e0_oracle_stable
        assert [r.e0_oracle for r in report.rungs] == [1, 1]

    @pytest.mark.slow
    def test_root_enters_box(self):
        """x1 - 3 flips to solvable at cutoff 4."""
        report = convergence_study(parse("x1 - 3"), [(2,), (4,), (8,)])
        assert report.rungs[0].status == VerdictStatus.NO_SOLUTION
        assert report.rungs[1].status == VerdictStatus.SOLVABLE
        assert report.flips == (1,)
        assert report.left_boundary
