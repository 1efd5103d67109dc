import json

from . import _core
from ._core import (
    ScenarioInvalid,
    ScenarioParseError,
    average_power,
    connectivity,
    flows_csv,
    hydrogen_mass_kg,
    replay_dir,
    replicate_mode,
    states_for_pairs,
    validate,
)


def simulate(scenario, steps=None, out_dir=None):
    """Run a scenario and return its summary as a dict."""
    return json.loads(_core.simulate(str(scenario), steps, None if out_dir is None else str(out_dir)))


__all__ = [
    "ScenarioInvalid",
    "ScenarioParseError",
    "average_power",
    "connectivity",
    "flows_csv",
    "hydrogen_mass_kg",
    "replay_dir",
    "replicate_mode",
    "simulate",
    "states_for_pairs",
    "validate",
]
