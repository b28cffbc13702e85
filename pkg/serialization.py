"""JSON layouts for everything the CLI and the tool server emit.

Keys are inserted in a fixed order so identical inputs give byte-identical output.
"""
import json
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from diophantine import OracleResult, evaluate, format_polynomial
from flow import snap_verdict
from models import (
    BasisMap,
    EvolutionReport,
    FlowPath,
    HermitianOperator,
    MultiIndex,
    Polynomial,
    StudyReport,
    Verdict,
    WaveFunction,
)


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2)


def _pairs(values: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.ravel(values)]


def _index(index: Optional[MultiIndex]) -> Optional[List[int]]:
    return list(index) if index is not None else None


def operator_to_dict(op: HermitianOperator) -> Dict[str, Any]:
    """{dim, cutoffs, entries}: entries are [re, im] pairs in row-major order."""
    return {
        "dim": op.dim,
        "cutoffs": _index(op.cutoffs),
        "entries": _pairs(op.entries),
    }


def operator_from_dict(data: Dict[str, Any]) -> HermitianOperator:
    dim = int(data["dim"])
    pairs = np.asarray(data["entries"], dtype=np.float64)
    if pairs.shape != (dim * dim, 2):
        raise ValueError(f"Expected {dim * dim} [re, im] pairs, got array of shape {pairs.shape}")
    entries = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim)
    cutoffs = tuple(data["cutoffs"]) if data.get("cutoffs") is not None else None
    return HermitianOperator(dim=dim, entries=entries, cutoffs=cutoffs)


def state_to_dict(state: WaveFunction) -> Dict[str, Any]:
    return {
        "dim": state.basis.dim,
        "cutoffs": list(state.basis.cutoffs),
        "entries": _pairs(state.amplitudes),
    }


def state_from_dict(data: Dict[str, Any]) -> WaveFunction:
    basis = BasisMap(cutoffs=tuple(int(d) for d in data["cutoffs"]))
    pairs = np.asarray(data["entries"], dtype=np.float64)
    if pairs.shape != (basis.dim, 2):
        raise ValueError(f"Expected {basis.dim} [re, im] pairs, got array of shape {pairs.shape}")
    return WaveFunction(amplitudes=pairs[:, 0] + 1j * pairs[:, 1], basis=basis)


def polynomial_to_dict(p: Polynomial) -> Dict[str, Any]:
    return {
        "polynomial": format_polynomial(p),
        "num_vars": p.num_vars,
        "degree": p.degree,
        "terms": [{"coefficient": c, "exponents": list(e)} for c, e in p.monomials],
    }


def oracle_to_dict(result: OracleResult) -> Dict[str, Any]:
    return {"min": result.min_value, "witnesses": [list(w) for w in result.witnesses]}


def verdict_to_dict(verdict: Verdict) -> Dict[str, Any]:
    return {
        "status": verdict.status.value,
        "witness": _index(verdict.witness),
        "e0_flow": verdict.e0_flow,
        "e0_oracle": verdict.e0_oracle,
        "dynamics_identified": _index(verdict.dynamics_identified),
        "cutoffs": list(verdict.cutoffs),
        "diagnostics": list(verdict.diagnostics),
    }


def path_to_dict(path: FlowPath) -> Dict[str, Any]:
    final = path.final
    e0 = float(np.min(final.eigenvalues))
    data: Dict[str, Any] = {
        "tracked": final.tracked,
        "partial": path.partial,
        "s_final": final.s,
        "accepted_steps": len(path.step_log),
        "permuted_steps": sum(1 for r in path.step_log if r.permuted),
        "endpoint_fallback": any(r.endpoint for r in path.step_log),
        "min_gap": min(state.gap_floor for state in path.states),
        "eigenvalues_final": [float(e) for e in np.sort(final.eigenvalues)],
        "e0_final": e0,
    }
    if not path.partial:
        snapped, confident = snap_verdict(e0)
        data["snapped"] = snapped
        data["confident"] = confident
    return data


def report_to_dict(report: EvolutionReport, p: Optional[Polynomial] = None) -> Dict[str, Any]:
    top = []
    for index, probability in report.top_occupations:
        row: Dict[str, Any] = {"state": list(index), "probability": probability}
        if p is not None:
            row["d_squared"] = evaluate(p, index) ** 2
        top.append(row)
    return {
        "tau": report.tau,
        "steps": report.steps,
        "norm_drift": report.norm_drift,
        "max_step_defect": report.max_step_defect,
        "top_occupations": top,
        "warnings": list(report.warnings),
    }


def sweep_to_dict(
    identified: Optional[MultiIndex], history: Sequence[EvolutionReport], p: Polynomial
) -> Dict[str, Any]:
    return {
        "identified": _index(identified),
        "d_squared": evaluate(p, identified) ** 2 if identified is not None else None,
        "rounds": [report_to_dict(report, p) for report in history],
    }


def study_to_dict(report: StudyReport) -> Dict[str, Any]:
    return {
        "rungs": [
            {
                "cutoffs": list(rung.cutoffs),
                "status": rung.status.value,
                "e0_flow": rung.e0_flow,
                "e0_oracle": rung.e0_oracle,
                "interior_minimum": rung.interior_minimum,
                "diagnostics": list(rung.diagnostics),
            }
            for rung in report.rungs
        ],
        "verdict_stable": report.verdict_stable,
        "e0_oracle_stable": report.e0_oracle_stable,
        "flips": list(report.flips),
        "left_boundary": report.left_boundary,
    }
