"""Shared domain vocabulary: commands, selections, drones, world, events.

Everything here is a plain value type; no module-level mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Union

import numpy as np

from .errors import NoMatch

ALL = "all"
# selection supplied by pointing within the fusion window ("you go down")
DEICTIC = "deictic"

DIRECTIONS = ("up", "down", "left", "right", "ahead", "backward")

DEFAULT_GO_DISTANCE_M = 2.0
DEFAULT_ROTATE_DEG = 90.0

# Deictic pointing resolves to the drone nearest the ray inside this cone.
DEFAULT_CONE_HALF_ANGLE_DEG = 15.0


class Verb(Enum):
    TAKE_OFF = "take_off"
    CONTINUE = "continue"
    LAND = "land"
    ROTATE_OCLOCK = "rotate_oclock"
    SELECT = "select"
    FASTER = "faster"
    SLOWER = "slower"
    ROTATE_CLOCKWISE = "rotate_clockwise"
    ROTATE_ANTICLOCKWISE = "rotate_anticlockwise"
    BRAKE = "brake"
    GO = "go"
    SEARCH_EXPANDING = "search_expanding"
    SEARCH_PARALLEL_TRACK = "search_parallel_track"
    SEARCH_CREEPING_LINE = "search_creeping_line"
    GO_THERE = "go_there"
    SWITCH = "switch"


class Mode(Enum):
    AUTONOMOUS = "autonomous"
    MIXED_INITIATIVE = "mixed_initiative"
    TELEOPERATED = "teleoperated"


class Source(Enum):
    SPEECH = "speech"
    GESTURE = "gesture"
    FUSED = "fused"
    POINTING = "pointing"


# Selection is resolved to a concrete drone-id set, the ALL marker, or None
# meaning "whatever is currently selected" (resolved by the executor).
Selection = Union[None, str, frozenset]


@dataclass(frozen=True)
class Command:
    """A parsed operator intention.

    Parameter fields are verb-specific and stay None when not applicable.
    ``defaulted`` names the parameters that were filled in with defaults.
    """

    verb: Verb
    selection: Selection = None
    confidence: float = 1.0
    source: Source = Source.SPEECH
    timestamp: float = 0.0
    hour: Optional[int] = None          # ROTATE_OCLOCK, 1..12
    direction: Optional[str] = None     # GO
    distance: Optional[float] = None    # GO, meters
    target: Optional[tuple] = None      # GO_THERE, ground point (x, y, z)
    mode: Optional[str] = None          # SWITCH: "command" | "joystick"
    angle: Optional[float] = None       # ROTATE_CW/ACW target, degrees
    defaulted: frozenset = frozenset()

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0,1]")
        if self.verb is Verb.ROTATE_OCLOCK and self.hour is not None:
            if not 1 <= self.hour <= 12:
                raise ValueError(f"o'clock hour {self.hour} outside 1..12")
        if self.verb is Verb.GO and self.distance is not None:
            if not self.distance > 0:
                raise ValueError("Go distance must be positive")
        if self.verb is Verb.GO and self.direction is not None:
            if self.direction not in DIRECTIONS:
                raise ValueError(f"unknown direction {self.direction!r}")
        if self.target is not None:
            if len(self.target) != 3 or not all(math.isfinite(c) for c in self.target):
                raise ValueError("target must be a finite 3D point")

    def with_defaults(self) -> "Command":
        """Fill verb-specific missing parameters with the documented defaults."""
        filled = set(self.defaulted)
        kw = {}
        if self.verb is Verb.GO and self.distance is None:
            kw["distance"] = DEFAULT_GO_DISTANCE_M
            filled.add("distance")
        if self.verb in (Verb.ROTATE_CLOCKWISE, Verb.ROTATE_ANTICLOCKWISE) and self.angle is None:
            kw["angle"] = DEFAULT_ROTATE_DEG
            filled.add("angle")
        if self.verb is Verb.ROTATE_OCLOCK and self.hour is None:
            kw["hour"] = 3
            filled.add("hour")
        if not kw:
            return self
        return replace(self, defaulted=frozenset(filled), **kw)

    def same_intent(self, other: "Command") -> bool:
        """True when both commands ask for the same action (confidence aside)."""
        return (
            self.verb is other.verb
            and self.hour == other.hour
            and self.direction == other.direction
            and self.mode == other.mode
        )


@dataclass(frozen=True)
class Fragment:
    """A partial interpretation that only fusion can complete.

    kinds: "distance" (meters), "oclock" (hour), "point" (ground target).
    """

    kind: str
    value: object
    confidence: float = 1.0
    timestamp: float = 0.0


@dataclass(frozen=True)
class NBestEntry:
    interpretation: object  # Command or gesture-label string or Fragment
    score: float

    def __post_init__(self):
        if self.score < 0:
            raise ValueError("score must be >= 0")


@dataclass(frozen=True)
class NBestList:
    """Ranked hypotheses, best first. Capped at ``limit`` entries."""

    entries: tuple = ()
    limit: int = 5

    @staticmethod
    def from_scored(pairs, limit: int = 5) -> "NBestList":
        ranked = sorted(pairs, key=lambda p: -p[1])[:limit]
        return NBestList(tuple(NBestEntry(i, s) for i, s in ranked), limit)

    def top(self) -> NBestEntry:
        return self.entries[0]

    def __len__(self):
        return len(self.entries)

    def __bool__(self):
        return bool(self.entries)


@dataclass
class DroneState:
    id: str
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    yaw: float = 0.0
    mode: Mode = Mode.AUTONOMOUS
    active_task: Optional[Verb] = None
    battery_s: float = 25.0 * 60.0  # quadrotor endurance, seconds

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        if self.position[2] < 0:
            raise ValueError("drone altitude below ground")


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float


@dataclass(frozen=True)
class Box:
    lo: tuple  # (x, y, z) min corner
    hi: tuple  # (x, y, z) max corner


@dataclass
class Victim:
    position: tuple  # ground point (x, y)
    found: bool = False


@dataclass
class WorldModel:
    """Axis-aligned mission area with ground plane z = 0."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_max: float = 60.0
    obstacles: list = field(default_factory=list)
    victims: list = field(default_factory=list)

    def contains(self, p) -> bool:
        x, y, z = p
        return (
            self.x_min <= x <= self.x_max
            and self.y_min <= y <= self.y_max
            and 0.0 <= z <= self.z_max
        )

    def clamp(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.array(
            [
                np.clip(p[0], self.x_min, self.x_max),
                np.clip(p[1], self.y_min, self.y_max),
                np.clip(p[2], 0.0, self.z_max),
            ]
        )


# ---------------------------------------------------------------------------
# Operator events


@dataclass(frozen=True)
class Transcript:
    text: str
    asr_confidence: Optional[float] = None


@dataclass(frozen=True)
class PoseChange:
    pose: str  # "open" | "closed" | "other"


@dataclass(frozen=True)
class PointingRay:
    origin: tuple
    direction: tuple


@dataclass(frozen=True)
class JoystickDelta:
    delta: tuple  # meters per tick, 3-vector


@dataclass(frozen=True)
class Mark:
    """Victim confirmation issued from the operator interface."""


@dataclass(frozen=True)
class TracePayload:
    """Inline IMU samples captured between hand-close and hand-open."""

    samples: tuple  # of (t, (ax, ay, az), (qw, qx, qy, qz))


@dataclass(frozen=True)
class OperatorEvent:
    timestamp: float
    payload: object


# ---------------------------------------------------------------------------
# Selection resolution


def resolve_selection(query, fleet, names=None, cone_half_angle_deg=DEFAULT_CONE_HALF_ANGLE_DEG):
    """Resolve a selection phrase or pointing ray to a drone-id set.

    ``query`` is a phrase string ("all hawks", "red hawk", a drone id) or a
    PointingRay. ``names`` maps callsign phrases to drone ids. Pointing picks
    the drone nearest the ray axis inside the cone; angular ties break to the
    lowest id. Raises NoMatch when nothing qualifies, so the caller can keep
    its previous selection.
    """
    if not fleet:
        raise ValueError("fleet is empty")
    ids = {d.id for d in fleet}

    if isinstance(query, str):
        phrase = " ".join(query.lower().split())
        if phrase in ("all", "all hawks", "everyone"):
            return ALL
        if names:
            for name, drone_id in names.items():
                if phrase == name.lower() and drone_id in ids:
                    return frozenset({drone_id})
        if phrase in ids:
            return frozenset({phrase})
        raise NoMatch(f"no drone answers to {query!r}")

    if isinstance(query, PointingRay):
        origin = np.asarray(query.origin, dtype=float)
        direction = np.asarray(query.direction, dtype=float)
        norm = np.linalg.norm(direction)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("pointing direction must be finite and nonzero")
        direction = direction / norm
        best = None
        for drone in sorted(fleet, key=lambda d: d.id):
            offset = drone.position - origin
            dist = np.linalg.norm(offset)
            if dist == 0.0:
                angle = 0.0
            else:
                cosang = float(np.dot(offset, direction) / dist)
                angle = math.degrees(math.acos(np.clip(cosang, -1.0, 1.0)))
            if angle <= cone_half_angle_deg and (best is None or angle < best[0] - 1e-12):
                best = (angle, drone.id)
        if best is None:
            raise NoMatch("no drone inside the pointing cone")
        return frozenset({best[1]})

    raise TypeError(f"cannot resolve selection from {type(query).__name__}")
