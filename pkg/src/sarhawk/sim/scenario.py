"""Scenario configuration: mission area, fleet, victims, drone limits."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .. import wire
from ..errors import InvalidScenario
from ..model import DroneState, Sphere, Victim, WorldModel

MAX_AIRSPEED = 15.0   # m/s
MAX_CLIMB = 8.0       # m/s
FLIGHT_TIME_S = 25.0 * 60.0


@dataclass
class ScenarioConfig:
    area_x: float = 120.0
    area_y: float = 120.0
    victim_count: int = 6
    deadline_s: float = 360.0
    drone_count: int = 3
    seed: int = 0
    footprint_radius: float = 15.0       # camera footprint at reference altitude
    footprint_ref_altitude: float = 20.0
    search_altitude: float = 20.0
    search_speed: float = 0.6            # commanded visual-scan pace on search legs
    cruise_speed: float = 10.0
    tick_dt: float = 0.05
    fusion_window_s: float = 1.0
    gesture_seed: int = 1234             # training-set corpus seed
    names: dict = field(default_factory=dict)
    obstacles: list = field(default_factory=list)

    def __post_init__(self):
        if not self.names:
            callsigns = ["red hawk", "blue hawk", "green hawk", "gold hawk",
                         "grey hawk", "black hawk"]
            self.names = {
                callsigns[i]: f"d{i + 1}" for i in range(min(self.drone_count, 6))
            }

    def validate(self):
        if self.deadline_s <= 0:
            raise InvalidScenario("deadline must be positive")
        if self.drone_count < 1:
            raise InvalidScenario("need at least one drone")
        if self.victim_count < 0:
            raise InvalidScenario("negative victim count")
        if self.area_x <= 0 or self.area_y <= 0:
            raise InvalidScenario("degenerate area")
        if self.tick_dt <= 0:
            raise InvalidScenario("tick_dt must be positive")
        return self

    def drone_ids(self):
        return [f"d{i + 1}" for i in range(self.drone_count)]

    @staticmethod
    def from_file(path) -> "ScenarioConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidScenario(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        return ScenarioConfig.from_dict(raw)

    @staticmethod
    def from_dict(raw: dict) -> "ScenarioConfig":
        if raw.get("type") not in (None, "scenario"):
            raise InvalidScenario(f"not a scenario file (type={raw.get('type')!r})")
        known = {f for f in ScenarioConfig.__dataclass_fields__}
        unknown = set(raw) - known - {"type"}
        if unknown:
            raise InvalidScenario(f"unknown scenario fields: {sorted(unknown)}")
        kwargs = {k: v for k, v in raw.items() if k in known}
        if "obstacles" in kwargs:
            kwargs["obstacles"] = [wire.from_wire(o) for o in kwargs["obstacles"]]
        return ScenarioConfig(**kwargs).validate()


wire.register(
    "scenario",
    ScenarioConfig,
    lambda c: {
        **{k: v for k, v in asdict(c).items() if k != "obstacles"},
        "obstacles": [wire.to_wire(o) for o in c.obstacles],
    },
    lambda d: ScenarioConfig.from_dict(d),
)


def build_world(cfg: ScenarioConfig) -> WorldModel:
    """World with seeded victim placement, margin from the edges, clear of
    obstacles (resampled when a spawn lands inside one)."""
    world = WorldModel(
        0.0, cfg.area_x, 0.0, cfg.area_y, z_max=80.0, obstacles=list(cfg.obstacles)
    )
    rng = np.random.default_rng(cfg.seed)
    margin = min(5.0, cfg.area_x / 10, cfg.area_y / 10)
    victims = []
    for _ in range(cfg.victim_count):
        for _attempt in range(100):
            x = float(rng.uniform(margin, cfg.area_x - margin))
            y = float(rng.uniform(margin, cfg.area_y - margin))
            if _spawn_clear(x, y, cfg.obstacles):
                victims.append(Victim((x, y)))
                break
        else:
            raise InvalidScenario("obstacles cover all victim spawn points")
    world.victims = victims
    return world


def _spawn_clear(x, y, obstacles):
    for o in obstacles:
        if isinstance(o, Sphere):
            cx, cy, cz = o.center
            if (x - cx) ** 2 + (y - cy) ** 2 <= o.radius**2 and abs(cz) <= o.radius:
                return False
        else:
            if o.lo[0] <= x <= o.hi[0] and o.lo[1] <= y <= o.hi[1] and o.lo[2] <= 0.5:
                return False
    return True


def initial_drones(cfg: ScenarioConfig):
    """Fleet on launch pads along the south edge, evenly spread."""
    ids = cfg.drone_ids()
    pitch = cfg.area_x / (len(ids) + 1)
    return [
        DroneState(
            id=drone_id,
            position=np.array([pitch * (i + 1), 2.0, 0.0]),
            battery_s=FLIGHT_TIME_S,
        )
        for i, drone_id in enumerate(ids)
    ]
