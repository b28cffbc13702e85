import json

from fixtures import FIXTURES
from schedules import registry


def get_fixtures() -> str:
    try:
        return json.dumps({
            "fixtures": [
                {
                    "name": f.name,
                    "polynomial": f.polynomial,
                    "cutoffs": list(f.cutoffs),
                    "expected_status": f.expected_status.value,
                    "expected_minimum": f.expected_minimum,
                    "expected_witness": list(f.expected_witness) if f.expected_witness is not None else None,
                    "boundary": f.boundary,
                }
                for f in FIXTURES
            ]
        }, indent=2)
    except Exception as e:
        return f"Error getting fixtures: {str(e)}"


def get_schedules() -> str:
    try:
        return json.dumps({"schedules": registry.names()}, indent=2)
    except Exception as e:
        return f"Error getting schedules: {str(e)}"
