"""Mixed-initiative trajectory blending.

The executed position is m(t) = a(t) + h(t): the planned position plus a
human offset. While the operator intervenes (mixed ON) each tick's control
delta accumulates into h; on release h decays linearly back to zero. Leaving
the workspace sphere around the planned position triggers a replan request,
and every tick with a nonzero offset emits a feedback pulse whose intensity
tracks |h| against the workspace radius.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import planning, wire
from .errors import NoPath
from .model import Command, DroneState, Mode, PoseChange, Verb

DEFAULT_WORKSPACE_RADIUS = 2.0   # meters
DEFAULT_LAMBDA_RATE = 0.5        # m/s decay toward the planned position
DEFAULT_MAX_INTERVENTION = 0.5   # meters per tick


@dataclass(frozen=True)
class InterventionSignal:
    delta: tuple                 # meters this tick
    source: str = "joystick_gesture"


@dataclass(frozen=True)
class ReplanRequested:
    timestamp: float
    offset_norm: float


@dataclass(frozen=True)
class FeedbackPulse:
    timestamp: float
    intensity: float  # |h| / workspace radius


wire.register(
    "replan_requested",
    ReplanRequested,
    lambda r: {"timestamp": float(r.timestamp), "offset_norm": float(r.offset_norm)},
    lambda d: ReplanRequested(d["timestamp"], d["offset_norm"]),
)

wire.register(
    "feedback_pulse",
    FeedbackPulse,
    lambda p: {"timestamp": float(p.timestamp), "intensity": float(p.intensity)},
    lambda d: FeedbackPulse(d["timestamp"], d["intensity"]),
)


@dataclass(frozen=True)
class BlendState:
    h: tuple = (0.0, 0.0, 0.0)
    mixed: bool = False
    workspace_radius: float = DEFAULT_WORKSPACE_RADIUS
    lambda_rate: float = DEFAULT_LAMBDA_RATE
    max_intervention: float = DEFAULT_MAX_INTERVENTION
    above: bool = False   # latch: |h| currently beyond the workspace sphere

    def offset(self) -> np.ndarray:
        return np.asarray(self.h, dtype=float)


def step_blend(state: BlendState, a_t, u: Optional[InterventionSignal], dt: float,
               now: float = 0.0):
    """One control tick. Returns (m_t, new_state, events).

    mixed ON with an intervention accumulates the delta into h; otherwise h
    shrinks toward zero by lambda_rate*dt along -h without overshooting.
    ReplanRequested fires exactly once per workspace-sphere crossing.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    a_t = np.asarray(a_t, dtype=float)
    h = state.offset()

    if state.mixed and u is not None:
        delta = np.asarray(u.delta, dtype=float)
        norm = float(np.linalg.norm(delta))
        if norm > state.max_intervention:
            delta = delta * (state.max_intervention / norm)
        h = h + delta
    else:
        norm = float(np.linalg.norm(h))
        if norm > 0.0:
            shrink = min(norm, state.lambda_rate * dt)
            factor = 1.0 - shrink / norm
            h = h * factor if factor > 0.0 else np.zeros(3)

    norm = float(np.linalg.norm(h))
    events = []
    above = norm > state.workspace_radius
    if above and not state.above:
        events.append(ReplanRequested(now, norm))
    if norm > 1e-12:
        events.append(FeedbackPulse(now, norm / state.workspace_radius))

    new_state = replace(state, h=tuple(h), above=above)
    return a_t + h, new_state, events


def handle_mode(drone: DroneState, event) -> Mode:
    """Apply an interaction-metaphor event to a drone's control mode.

    Hand-open turns the arm into a virtual joystick: trajectory adjustment
    while a task runs, full teleoperation otherwise. Hand-closed returns to
    command interpretation. Brake halts the task so that a following
    hand-open reaches full teleoperation.
    """
    if isinstance(event, PoseChange):
        if event.pose == "open":
            drone.mode = (
                Mode.MIXED_INITIATIVE if drone.active_task is not None else Mode.TELEOPERATED
            )
        elif event.pose == "closed":
            drone.mode = Mode.AUTONOMOUS
        return drone.mode
    if isinstance(event, Command) and event.verb is Verb.BRAKE:
        drone.active_task = None
        drone.mode = Mode.AUTONOMOUS
        return drone.mode
    return drone.mode


def replan_on_exit(position, next_waypoint, world, state: BlendState,
                   cfg: planning.PlanConfig = None):
    """Plan a fresh path from the deviated position to the next waypoint.

    Returns (path, reset_state); h is zeroed because the new plan starts at
    the drone's actual position. NoPath propagates so the caller can hold
    position and alert the operator.
    """
    cfg = cfg or planning.PlanConfig()
    path = planning.plan_path(np.asarray(position, float), np.asarray(next_waypoint, float), world, cfg)
    return path, replace(state, h=(0.0, 0.0, 0.0), above=False, mixed=False)
