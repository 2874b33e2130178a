"""Scripted operators: timed event lists that drive headless missions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import wire
from ..errors import InvalidScenario
from ..model import Mark, OperatorEvent, Transcript
from .scenario import ScenarioConfig


@dataclass
class OperatorScript:
    events: list = field(default_factory=list)

    def validate(self, deadline_s: float) -> "OperatorScript":
        last = -float("inf")
        for e in self.events:
            if e.timestamp < last:
                raise InvalidScenario("script events out of order")
            last = e.timestamp
            if e.timestamp > deadline_s:
                raise InvalidScenario(
                    f"script event at t={e.timestamp} beyond deadline {deadline_s}"
                )
        return self

    def save(self, path):
        wire.dump_lines(self.events, path)

    @staticmethod
    def load(path) -> "OperatorScript":
        events = wire.load_lines(path)
        bad = [e for e in events if not isinstance(e, OperatorEvent)]
        if bad:
            raise InvalidScenario(f"script contains non-event records: {type(bad[0]).__name__}")
        return OperatorScript(events)

    def modality_tally(self) -> dict:
        """Expected interaction counts, by construction of the script."""
        tally = {}
        for e in self.events:
            kind = type(e.payload).__name__
            tally[kind] = tally.get(kind, 0) + 1
        return tally


def reference_search_script(cfg: ScenarioConfig, mark_period_s: float = 2.0) -> OperatorScript:
    """The scripted operator used for batch evaluation.

    All drones take off, sweep their strip of the area in parallel track,
    and the operator keeps every camera in view, confirming victims with
    periodic marks. The same recipe adapts to any fleet size because the
    search command partitions the area per drone.
    """
    events = [
        OperatorEvent(0.5, Transcript("all hawks take off")),
        OperatorEvent(3.0, Transcript("all hawks search parallel track")),
    ]
    t = 6.0
    while t < cfg.deadline_s - 1.0:
        events.append(OperatorEvent(t, Mark()))
        t += mark_period_s
    return OperatorScript(events).validate(cfg.deadline_s)
