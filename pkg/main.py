#!/usr/bin/env python3

from mcp.server.fastmcp import FastMCP
from mcp_tools import parse_polynomial, oracle, flow, sweep, decide_polynomial, study
from mcp_resources import get_fixtures, get_schedules

mcp = FastMCP("Diophantine Spectral Flow")

@mcp.tool()
def parse_polynomial_tool(poly: str) -> str:
    return parse_polynomial(poly)

@mcp.tool()
def oracle_tool(poly: str, cutoffs: str = "") -> str:
    return oracle(poly, cutoffs)

@mcp.tool()
def flow_tool(poly: str, cutoffs: str = "", tracked: int = 6, tol: float = 1e-6, schedule: str = "linear") -> str:
    return flow(poly, cutoffs, tracked, tol, schedule)

@mcp.tool()
def sweep_tool(poly: str, cutoffs: str = "", tau0: float = 1.0, growth: float = 2.0, max_rounds: int = 12) -> str:
    return sweep(poly, cutoffs, tau0, growth, max_rounds)

@mcp.tool()
def decide_tool(poly: str, cutoffs: str = "", tol: float = 1e-6, max_rounds: int = 16, schedule: str = "linear") -> str:
    return decide_polynomial(poly, cutoffs, tol, max_rounds, schedule)

@mcp.tool()
def study_tool(poly: str, ladder: str, tol: float = 1e-6, max_rounds: int = 16) -> str:
    return study(poly, ladder, tol, max_rounds)

@mcp.resource("h10://fixtures")
def get_fixtures_resource() -> str:
    return get_fixtures()

@mcp.resource("h10://schedules")
def get_schedules_resource() -> str:
    return get_schedules()

@mcp.prompt()
def decision_guide() -> str:
    return """Deciding a Diophantine equation D(x1..xK) = 0 within a box:

1. parse_polynomial(poly) - check the input, e.g. "x1^2 + x2^2 - 25"
2. oracle(poly, cutoffs) - exhaustive minimum of D^2 over [0, d_i]
3. flow(poly, cutoffs, tracked, tol) - follow the lowest eigenvalues of
   H(s) = H_I + f(s)(H_P - H_I) to s=1; E0(1) snaps to min D^2
4. sweep(poly, cutoffs, tau0, growth, max_rounds) - adiabatic evolution at
   growing tau until one Fock state holds more than half the probability
5. decide(poly, cutoffs) - all three merged into one verdict
6. study(poly, ladder) - decide along "2;4;8" and watch stability

Verdicts:
- SolvableWithWitness: the witness satisfies D = 0 exactly
- NoSolutionWithinBox: oracle, flow and dynamics all agree on the same minimum >= 1
- Inconclusive: the diagnostics name the component that disagreed

Variables range over the non-negative integers. A minimum on the upper
face of the box means the cutoff is too small: escalate it.

Resources:
- h10://fixtures - bundled instances with known answers
- h10://schedules - registered interpolation schedules"""

def main():
    try:
        mcp.run()
    except Exception as e:
        print(f"Error running MCP server: {str(e)}")
        raise

if __name__ == "__main__":
    main()
