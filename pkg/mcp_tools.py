import json
from typing import Tuple

from decision import convergence_study, decide
from diophantine import brute_force_min_square, lattice_box, parse
from dynamics import tau_sweep
from flow import continue_flow
from fock import build_instance
from models import DecisionConfig, MultiIndex, Polynomial, SolverConfig
from serialization import oracle_to_dict, path_to_dict, polynomial_to_dict, study_to_dict, sweep_to_dict, verdict_to_dict

DEFAULT_CUTOFF = 8


def _cutoffs(p: Polynomial, cutoffs: str) -> MultiIndex:
    if not cutoffs.strip():
        return (DEFAULT_CUTOFF,) * p.num_vars
    values = tuple(int(x) for x in cutoffs.split(","))
    if len(values) != p.num_vars:
        raise ValueError(f"Got {len(values)} cutoffs for a polynomial in {p.num_vars} variables")
    return values


def _config(tol: float = 1e-6, max_rounds: int = 16, schedule: str = "linear") -> DecisionConfig:
    return DecisionConfig(schedule=schedule, solver=SolverConfig(flow_tol=tol, max_rounds=max_rounds))


def _ladder(text: str) -> Tuple[MultiIndex, ...]:
    return tuple(tuple(int(x) for x in rung.split(",")) for rung in text.split(";") if rung.strip())


def parse_polynomial(poly: str) -> str:
    try:
        return json.dumps(polynomial_to_dict(parse(poly)), indent=2)
    except Exception as e:
        return f"Error parsing polynomial: {str(e)}"


def oracle(poly: str, cutoffs: str = "") -> str:
    try:
        p = parse(poly)
        result = brute_force_min_square(p, lattice_box(_cutoffs(p, cutoffs)))
        return json.dumps(oracle_to_dict(result), indent=2)
    except Exception as e:
        return f"Error running oracle: {str(e)}"


def flow(poly: str, cutoffs: str = "", tracked: int = 6, tol: float = 1e-6, schedule: str = "linear") -> str:
    try:
        p = parse(poly)
        instance = build_instance(p, _cutoffs(p, cutoffs), schedule=schedule)
        solver = SolverConfig(flow_tol=tol, tracked_states=tracked)
        path = continue_flow(instance, min(tracked, instance.basis.dim), tol, solver)
        return json.dumps(path_to_dict(path), indent=2)
    except Exception as e:
        return f"Error following spectral flow: {str(e)}"


def sweep(poly: str, cutoffs: str = "", tau0: float = 1.0, growth: float = 2.0, max_rounds: int = 12) -> str:
    try:
        p = parse(poly)
        instance = build_instance(p, _cutoffs(p, cutoffs))
        identified, history = tau_sweep(instance, tau0, growth, max_rounds, SolverConfig())
        return json.dumps(sweep_to_dict(identified, history, p), indent=2)
    except Exception as e:
        return f"Error running adiabatic sweep: {str(e)}"


def decide_polynomial(poly: str, cutoffs: str = "", tol: float = 1e-6, max_rounds: int = 16, schedule: str = "linear") -> str:
    try:
        p = parse(poly)
        verdict = decide(p, _cutoffs(p, cutoffs), _config(tol, max_rounds, schedule))
        return json.dumps(verdict_to_dict(verdict), indent=2)
    except Exception as e:
        return f"Error deciding polynomial: {str(e)}"


def study(poly: str, ladder: str, tol: float = 1e-6, max_rounds: int = 16) -> str:
    try:
        p = parse(poly)
        report = convergence_study(p, _ladder(ladder), _config(tol, max_rounds))
        return json.dumps(study_to_dict(report), indent=2)
    except Exception as e:
        return f"Error running convergence study: {str(e)}"
