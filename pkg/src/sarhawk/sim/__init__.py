"""Deterministic multi-drone search-mission simulator."""

from .scenario import ScenarioConfig, build_world, initial_drones
from .mission import Mission, run_headless
from .metrics import MissionMetrics
from .script import OperatorScript, reference_search_script

__all__ = [
    "ScenarioConfig",
    "build_world",
    "initial_drones",
    "Mission",
    "run_headless",
    "MissionMetrics",
    "OperatorScript",
    "reference_search_script",
]
