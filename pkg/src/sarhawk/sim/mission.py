"""Mission state machine and fixed-step simulation loop.

All motion integrates at a fixed tick; every stochastic choice is seeded,
so a (config, script) pair reproduces bit-identical metrics and event logs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .. import blend, fusion, gesture, planning, patterns, speech, synth, wire
from ..errors import NoParse, NoPath, SarhawkError
from ..model import (
    ALL,
    DEICTIC,
    Command,
    DroneState,
    JoystickDelta,
    Mark,
    Mode,
    NBestEntry,
    NBestList,
    OperatorEvent,
    PointingRay,
    PoseChange,
    Source,
    TracePayload,
    Transcript,
    Verb,
)
from .metrics import MissionMetrics
from .scenario import (
    MAX_AIRSPEED,
    MAX_CLIMB,
    ScenarioConfig,
    build_world,
    initial_drones,
)

_DIRECTION_VECTORS = {
    "up": np.array([0.0, 0.0, 1.0]),
    "down": np.array([0.0, 0.0, -1.0]),
    "left": np.array([0.0, 1.0, 0.0]),
    "right": np.array([0.0, -1.0, 0.0]),
    "ahead": np.array([1.0, 0.0, 0.0]),
    "backward": np.array([-1.0, 0.0, 0.0]),
}

_SEARCH_KINDS = {
    Verb.SEARCH_EXPANDING: "expanding",
    Verb.SEARCH_PARALLEL_TRACK: "parallel_track",
    Verb.SEARCH_CREEPING_LINE: "creeping_line",
}


@dataclass(frozen=True)
class VictimFound:
    timestamp: float
    victim_index: int
    position: tuple
    drone_id: str


@dataclass(frozen=True)
class Alert:
    timestamp: float
    message: str


@dataclass(frozen=True)
class WireEvent:
    seq: int
    timestamp: float
    payload: object


wire.register(
    "victim_found",
    VictimFound,
    lambda v: {
        "timestamp": float(v.timestamp),
        "victim_index": v.victim_index,
        "position": [float(c) for c in v.position],
        "drone_id": v.drone_id,
    },
    lambda d: VictimFound(d["timestamp"], d["victim_index"], tuple(d["position"]), d["drone_id"]),
)

wire.register(
    "alert",
    Alert,
    lambda a: {"timestamp": float(a.timestamp), "message": a.message},
    lambda d: Alert(d["timestamp"], d["message"]),
)

wire.register(
    "wire_event",
    WireEvent,
    lambda e: {
        "seq": e.seq,
        "timestamp": float(e.timestamp),
        "payload": wire.to_wire(e.payload),
    },
    lambda d: WireEvent(d["seq"], d["timestamp"], wire.from_wire(d["payload"])),
)


@dataclass
class DroneExec:
    planned: np.ndarray                  # a(t), the autonomous reference
    route: list = field(default_factory=list)
    speed: float = 0.0
    stashed: tuple = None                # (route, speed) parked by Brake


_TRAINING_CACHE = {}


def default_training_set(seed: int) -> gesture.TrainingSet:
    """Session gesture templates, built once per corpus seed."""
    if seed not in _TRAINING_CACHE:
        train, _ = synth.make_corpus(seed, templates_per_label=10, probes_per_label=0)
        ts = gesture.TrainingSet(m=32)
        for label, trace in train:
            ts = gesture.add_template(ts, trace, label)
        _TRAINING_CACHE[seed] = ts
    return _TRAINING_CACHE[seed]


class Mission:
    """One mission: world, fleet, interpretation pipeline, metrics."""

    def __init__(self, cfg: ScenarioConfig, training_set: gesture.TrainingSet = None):
        cfg.validate()
        self.cfg = cfg
        self.world = build_world(cfg)
        self.drones = initial_drones(cfg)
        self.by_id = {d.id: d for d in self.drones}
        self.clock = 0.0
        self.selection = ALL
        self.hand_open = False
        self.pending_delta = np.zeros(3)
        self.training = training_set or default_training_set(cfg.gesture_seed)
        self.gesture_cfg = gesture.GestureConfig(m=self.training.m)
        self.fusion = fusion.FusionEngine(window_s=cfg.fusion_window_s)
        self.recorder = gesture.TraceRecorder()
        self.exec = {
            d.id: DroneExec(planned=d.position.copy()) for d in self.drones
        }
        self.blend = {d.id: blend.BlendState() for d in self.drones}
        self.speed_mult = {d.id: 1.0 for d in self.drones}
        self.metrics = MissionMetrics(victims_total=cfg.victim_count)
        self.seen_by = {}       # victim index -> sorted drone ids with it in view
        self._replans = 0
        self._snap_period = max(1, round(1.0 / cfg.tick_dt))
        self._ticks = 0

    # -- event intake -------------------------------------------------------

    def ingest(self, event: OperatorEvent) -> list:
        """Feed one operator event through the interpretation pipeline.

        Returns the stream events this produced (commands, alerts, finds).
        """
        out = []
        p = event.payload
        t = event.timestamp
        if isinstance(p, Transcript):
            try:
                nbest = speech.parse(
                    p, fleet=self.drones, names=self.cfg.names, timestamp=t
                )
            except NoParse as exc:
                out.append(Alert(t, f"speech: {exc}"))
                return out
            ev = fusion.ChannelEvent(Source.SPEECH, nbest, t, t)
            self._fuse(ev, out)
        elif isinstance(p, TracePayload):
            trace = gesture.MotionTrace(
                tuple(gesture.IMUSample(s[0], tuple(s[1]), tuple(s[2])) for s in p.samples)
            )
            self._classify_trace(trace, t, out)
        elif isinstance(p, PoseChange):
            self.hand_open = p.pose == "open"
            done = self.recorder.feed_pose(p.pose)
            if done is not None:
                self._classify_trace(done, t, out)
            for d in self._selected_drones():
                blend.handle_mode(d, p)
        elif isinstance(p, PointingRay):
            ev = fusion.pointing_event(p, t, fleet=self.drones, world=self.world)
            if ev is None:
                out.append(Alert(t, "pointing: above horizon and no drone in cone"))
            else:
                self._fuse(ev, out)
        elif isinstance(p, JoystickDelta):
            if self.hand_open:
                self.pending_delta = self.pending_delta + np.asarray(p.delta, float)
            else:
                out.append(Alert(t, "joystick input ignored: hand not open"))
        elif isinstance(p, Mark):
            self._mark(t, out)
        else:
            out.append(Alert(t, f"unknown payload {type(p).__name__}"))
        return out

    def _classify_trace(self, trace, t, out):
        try:
            labels = gesture.classify(trace, self.training, self.gesture_cfg)
        except SarhawkError as exc:
            out.append(Alert(t, f"gesture: {exc}"))
            return
        entries = tuple(
            NBestEntry(gesture.label_to_command(e.interpretation, e.score, t), e.score)
            for e in labels.entries
        )
        ev = fusion.ChannelEvent(Source.GESTURE, NBestList(entries), t, t)
        self._fuse(ev, out)

    def _fuse(self, ev, out):
        for cmd in self.fusion.ingest(ev):
            self.apply_command(cmd, out)

    # -- command execution --------------------------------------------------

    def _selected_drones(self):
        if self.selection == ALL:
            return list(self.drones)
        return [self.by_id[i] for i in sorted(self.selection) if i in self.by_id]

    def apply_command(self, cmd: Command, out: list):
        cmd = cmd.with_defaults()
        sel = cmd.selection
        if sel == DEICTIC:
            out.append(Alert(cmd.timestamp, "deictic selection never resolved; dropped"))
            return
        if sel is not None:
            known = {d.id for d in self.drones}
            if sel != ALL and not (set(sel) <= known):
                raise SarhawkError(f"script references unknown drone {sorted(set(sel) - known)}")
            self.selection = sel
        self.metrics.count_interaction(cmd.source.value)
        out.append(cmd)

        if cmd.verb is Verb.SELECT:
            return

        for drone in self._selected_drones():
            self._apply_to_drone(cmd, drone, out)

    def _apply_to_drone(self, cmd: Command, drone: DroneState, out: list):
        ex = self.exec[drone.id]
        v = cmd.verb
        if v is Verb.TAKE_OFF:
            target = ex.planned.copy()
            target[2] = self.cfg.search_altitude
            self._set_task(drone, ex, v, [target], self.cfg.cruise_speed)
        elif v is Verb.LAND:
            target = ex.planned.copy()
            target[2] = 0.0
            self._set_task(drone, ex, v, [target], self.cfg.cruise_speed)
        elif v is Verb.GO:
            vec = _DIRECTION_VECTORS[cmd.direction]
            target = self.world.clamp(ex.planned + vec * cmd.distance)
            self._set_task(drone, ex, v, [target], self.cfg.cruise_speed)
        elif v is Verb.GO_THERE:
            if cmd.target is None:
                out.append(Alert(cmd.timestamp, "go-there without a target; dropped"))
                return
            alt = max(ex.planned[2], 2.0)
            target = self.world.clamp((cmd.target[0], cmd.target[1], alt))
            self._set_task(drone, ex, v, [target], self.cfg.cruise_speed)
        elif v in _SEARCH_KINDS:
            self._start_search(cmd, drone, ex)
        elif v is Verb.ROTATE_OCLOCK:
            drone.yaw = float(np.radians(90.0 - 30.0 * cmd.hour))
        elif v is Verb.ROTATE_CLOCKWISE:
            drone.yaw -= float(np.radians(cmd.angle))
        elif v is Verb.ROTATE_ANTICLOCKWISE:
            drone.yaw += float(np.radians(cmd.angle))
        elif v is Verb.FASTER:
            self.speed_mult[drone.id] = min(3.0, self.speed_mult[drone.id] * 1.2)
        elif v is Verb.SLOWER:
            self.speed_mult[drone.id] = max(0.2, self.speed_mult[drone.id] * 0.8)
        elif v is Verb.BRAKE:
            ex.stashed = ([w.copy() for w in ex.route], ex.speed)
            ex.route = []
            blend.handle_mode(drone, cmd)
        elif v is Verb.CONTINUE:
            if ex.stashed is not None:
                route, speed = ex.stashed
                verb = drone.active_task or Verb.CONTINUE
                self._set_task(drone, ex, verb, route, speed)
                ex.stashed = None
        elif v is Verb.SWITCH:
            self.hand_open = cmd.mode == "joystick"

    def _set_task(self, drone, ex, verb, route, speed):
        ex.route = [np.asarray(w, dtype=float) for w in route]
        ex.speed = speed
        drone.active_task = verb

    def _start_search(self, cmd, drone, ex):
        ids = sorted(self.by_id)
        idx = ids.index(drone.id)
        n = len(ids)
        x0 = self.world.x_min + (self.world.x_max - self.world.x_min) * idx / n
        x1 = self.world.x_min + (self.world.x_max - self.world.x_min) * (idx + 1) / n
        alt = self.cfg.search_altitude
        r = self.cfg.footprint_radius * alt / self.cfg.footprint_ref_altitude
        spec = patterns.SearchPatternSpec(
            _SEARCH_KINDS[cmd.verb],
            x0, x1, self.world.y_min, self.world.y_max,
            spacing=1.6 * r,
            altitude=alt,
        )
        path = patterns.generate_pattern(spec)
        route = [np.asarray(w) for w in path.waypoints]
        if ex.planned[2] < alt - 0.5:
            climb = ex.planned.copy()
            climb[2] = alt
            route = [climb] + route
        self._set_task(drone, ex, cmd.verb, route, self.cfg.search_speed)

    def _mark(self, t, out):
        self.metrics.count_interaction("mark")
        selected = {d.id for d in self._selected_drones()}
        confirmed = False
        for v_idx, seers in sorted(self.seen_by.items()):
            victim = self.world.victims[v_idx]
            if victim.found:
                continue
            hits = selected.intersection(seers)
            if hits:
                victim.found = True
                self.metrics.record_detection(t)
                out.append(VictimFound(t, v_idx, victim.position, sorted(hits)[0]))
                confirmed = True
        if not confirmed:
            out.append(Alert(t, "mark: no detectable victim for current selection"))

    # -- simulation ---------------------------------------------------------

    def step(self, dt: float) -> list:
        """Advance one tick. Returns stream events (pulses, alerts, finds)."""
        if dt <= 0:
            return []
        out = []
        self.clock += dt
        self._ticks += 1

        for cmd in self.fusion.poll(self.clock):
            self.apply_command(cmd, out)

        delta = self.pending_delta
        self.pending_delta = np.zeros(3)
        selected_ids = {d.id for d in self._selected_drones()}

        for drone in self.drones:
            self._step_drone(drone, dt, delta if drone.id in selected_ids else None, out)

        self._update_visibility()
        self._refresh_modes(selected_ids)
        bucket = self._selection_bucket()
        self.metrics.accumulate_tick(
            dt, bucket, {d.id: d.mode.value for d in self.drones}
        )

        if self._ticks % self._snap_period == 0:
            for drone in self.drones:
                out.append(_snapshot(drone))
        return out

    def _step_drone(self, drone, dt, delta, out):
        ex = self.exec[drone.id]
        bs = self.blend[drone.id]

        if drone.position[2] > 0.05:
            drone.battery_s -= dt
            if drone.battery_s <= 0 and drone.active_task is not Verb.LAND:
                target = ex.planned.copy()
                target[2] = 0.0
                self._set_task(drone, ex, Verb.LAND, [target], self.cfg.cruise_speed)
                out.append(Alert(self.clock, f"{drone.id}: battery exhausted, landing"))

        teleop = drone.mode is Mode.TELEOPERATED and delta is not None
        if teleop:
            ex.planned = self.world.clamp(ex.planned + delta)
        else:
            self._advance_route(ex, drone, dt)

        intervention = None
        if drone.mode is Mode.MIXED_INITIATIVE and delta is not None and np.any(delta):
            intervention = blend.InterventionSignal(tuple(delta))
        mixed_on = intervention is not None
        if bs.mixed != mixed_on:
            bs = replace(bs, mixed=mixed_on)

        m, bs, ev = blend.step_blend(bs, ex.planned, intervention, dt, now=self.clock)
        for e in ev:
            if isinstance(e, blend.ReplanRequested):
                bs = self._replan(drone, ex, bs, m, out)
                m = ex.planned + np.asarray(bs.h)
            else:
                out.append(e)
        self.blend[drone.id] = bs

        prev = drone.position.copy()
        drone.position = self.world.clamp(m)
        drone.velocity = (drone.position - prev) / dt
        if drone.active_task is not None and not ex.route and ex.stashed is None:
            if drone.active_task is Verb.LAND and drone.position[2] < 0.05:
                drone.active_task = None
            elif drone.active_task is not Verb.LAND:
                drone.active_task = None

    def _advance_route(self, ex, drone, dt):
        budget = min(ex.speed * self.speed_mult[drone.id], MAX_AIRSPEED) * dt
        climb_budget = MAX_CLIMB * dt
        while budget > 1e-12 and ex.route:
            target = ex.route[0]
            offset = target - ex.planned
            dist = float(np.linalg.norm(offset))
            if dist < 1e-9:
                ex.route.pop(0)
                continue
            direction = offset / dist
            # climb-rate limit: vertical travel has its own per-tick budget
            fz = abs(direction[2])
            step = budget
            if fz > 1e-9:
                if climb_budget <= 1e-12:
                    break
                step = min(step, climb_budget / fz)
            step = min(step, dist)
            ex.planned = ex.planned + direction * step
            budget -= step
            climb_budget -= step * fz
            if step >= dist - 1e-12:
                ex.route.pop(0)

    def _replan(self, drone, ex, bs, current_m, out):
        target = ex.route[0] if ex.route else ex.planned
        self._replans += 1
        cfg = planning.PlanConfig(
            iterations=600,
            seed=(self.cfg.seed * 7919 + self._replans) % (2**31),
        )
        try:
            path, _ = planning.plan_path_checkpoints(
                self.world.clamp(current_m), target, self.world, cfg
            )
        except NoPath as exc:
            out.append(Alert(self.clock, f"{drone.id}: replanning failed ({exc}); holding"))
            ex.route = []
            return replace(bs, h=(0.0, 0.0, 0.0), above=False, mixed=False)
        out.append(Alert(self.clock, f"{drone.id}: workspace exceeded, replanning"))
        ex.planned = self.world.clamp(current_m)
        waypoints = [np.asarray(w) for w in path.waypoints[1:]]
        ex.route = waypoints + ex.route[1:]
        return replace(bs, h=(0.0, 0.0, 0.0), above=False, mixed=False)

    def _update_visibility(self):
        self.seen_by = {}
        ref = self.cfg.footprint_ref_altitude
        for v_idx, victim in enumerate(self.world.victims):
            if victim.found:
                continue
            seers = []
            for drone in self.drones:
                z = drone.position[2]
                if z < 1.0:
                    continue
                r = self.cfg.footprint_radius * z / ref
                dx = drone.position[0] - victim.position[0]
                dy = drone.position[1] - victim.position[1]
                if dx * dx + dy * dy <= r * r:
                    seers.append(drone.id)
            if seers:
                self.seen_by[v_idx] = seers

    def _refresh_modes(self, selected_ids):
        for drone in self.drones:
            if self.hand_open and drone.id in selected_ids:
                drone.mode = (
                    Mode.MIXED_INITIATIVE if drone.active_task is not None else Mode.TELEOPERATED
                )
            else:
                drone.mode = Mode.AUTONOMOUS

    def _selection_bucket(self) -> str:
        if self.selection == ALL or len(self.selection) != 1:
            return "all"
        return next(iter(self.selection))

    def detectable_victims(self):
        return dict(self.seen_by)


def _snapshot(drone: DroneState) -> DroneState:
    return DroneState(
        id=drone.id,
        position=drone.position.copy(),
        velocity=drone.velocity.copy(),
        yaw=drone.yaw,
        mode=drone.mode,
        active_task=drone.active_task,
        battery_s=drone.battery_s,
    )


def drive(mission: Mission, operator_events, until_s: float, emit=None):
    """Deliver timed operator events and tick the mission to a deadline.

    The one delivery rule shared by headless runs, live sessions, and
    replays: an event is ingested once the sim clock reaches its timestamp,
    strictly before the following tick. ``emit(timestamp, payload)``
    receives every log-worthy payload in order.
    """
    if emit is None:
        emit = lambda t, p: None
    pending = sorted(
        ((e.timestamp, i, e) for i, e in enumerate(operator_events)),
        key=lambda x: (x[0], x[1]),
    )
    dt = mission.cfg.tick_dt
    n_ticks = int(round(until_s / dt))

    def deliver():
        while pending and pending[0][0] <= mission.clock + 1e-9:
            _, _, ev = pending.pop(0)
            emit(ev.timestamp, ev)
            for produced in mission.ingest(ev):
                emit(mission.clock, produced)

    while mission._ticks < n_ticks:
        deliver()
        for produced in mission.step(dt):
            emit(mission.clock, produced)
    deliver()


def run_headless(cfg: ScenarioConfig, script, collect_log: bool = False):
    """Run a scripted mission to its deadline.

    Returns MissionMetrics, or (MissionMetrics, [WireEvent]) with
    collect_log. Bit-reproducible for identical (cfg, script).
    """
    mission = Mission(cfg)
    log = []

    def emit(timestamp, payload):
        log.append(WireEvent(len(log), timestamp, payload))

    drive(mission, script.events, cfg.deadline_s, emit if collect_log else None)
    if collect_log:
        emit(mission.clock, mission.metrics)
        return mission.metrics, log
    return mission.metrics
