"""Sessions: the ordered boundary between operators and the simulation.

A session owns one mission, assigns every inbound event a sequence number,
and appends everything (inputs echoed, commands, alerts, snapshots) to an
append-only log. Logs replay to byte-identical logs: live events are
stamped with sim time at arrival, so the wall clock never leaks in.
"""

from __future__ import annotations

import itertools
import json
from typing import Optional

from .. import wire
from ..errors import CorruptTrace, InvalidScenario, SessionClosed
from ..model import OperatorEvent, WorldModel
from ..sim.mission import Mission, WireEvent, drive
from ..sim.scenario import ScenarioConfig

_session_ids = itertools.count(1)


class Session:
    def __init__(self, cfg: ScenarioConfig, mode: str = "live", session_id: str = None):
        cfg.validate()
        self.id = session_id or f"s{next(_session_ids)}"
        self.cfg = cfg
        self.mode = mode
        self.mission = Mission(cfg)
        self.log = []           # WireEvent, append-only
        self._seq = 0
        self.closed = False
        self.running = False    # live loop gate; opened paused
        self.listeners = []     # callables fed each new WireEvent

    # -- event plumbing ------------------------------------------------------

    def _emit(self, timestamp: float, payload) -> WireEvent:
        ev = WireEvent(self._seq, timestamp, payload)
        self._seq += 1
        self.log.append(ev)
        for listener in self.listeners:
            listener(ev)
        return ev

    def submit(self, payload, timestamp: Optional[float] = None) -> WireEvent:
        """Enqueue one operator input; returns the echoed log entry (ack)."""
        if self.closed:
            raise SessionClosed(f"session {self.id} is closed")
        if isinstance(payload, OperatorEvent):
            event = payload if timestamp is None else OperatorEvent(timestamp, payload.payload)
        else:
            event = OperatorEvent(
                self.mission.clock if timestamp is None else timestamp, payload
            )
        ack = self._emit(event.timestamp, event)
        for produced in self.mission.ingest(event):
            self._emit(self.mission.clock, produced)
        return ack

    def step(self, dt: Optional[float] = None):
        if self.closed:
            raise SessionClosed(f"session {self.id} is closed")
        dt = dt if dt is not None else self.cfg.tick_dt
        for produced in self.mission.step(dt):
            self._emit(self.mission.clock, produced)

    def close(self):
        if not self.closed:
            self._emit(self.mission.clock, self.mission.metrics)
            self.closed = True
            self.running = False

    # -- views ----------------------------------------------------------------

    def snapshot(self) -> dict:
        m = self.mission
        visible = m.detectable_victims()
        victims = [
            {"index": i, "position": [float(c) for c in v.position], "found": v.found}
            for i, v in enumerate(m.world.victims)
            if v.found or i in visible
        ]
        return {
            "type": "snapshot",
            "session": self.id,
            "mode": self.mode,
            "running": self.running,
            "clock": float(m.clock),
            "seq": self._seq,
            "selection": sorted(m.selection) if m.selection != "all" else "all",
            "hand_open": m.hand_open,
            "deadline_s": float(self.cfg.deadline_s),
            "world": wire.to_wire(_world_outline(m)),
            "drones": [wire.to_wire(d) for d in m.drones],
            "victims": victims,
            "detected": m.metrics.detected,
            "victims_total": m.metrics.victims_total,
            "names": self.cfg.names,
        }

    # -- batch driving ---------------------------------------------------------

    def run(self, operator_events, until_s: Optional[float] = None):
        """Drive the mission with timed events to a deadline (sim time).

        Uses the same delivery rule as live submission, which is what makes
        replayed logs byte-identical to recorded ones.
        """
        until = until_s if until_s is not None else self.cfg.deadline_s
        drive(self.mission, operator_events, until, emit=self._emit)
        self.close()
        return self.mission.metrics

    # -- persistence -------------------------------------------------------------

    def save_log(self, path):
        with open(path, "w") as fh:
            header = {
                "type": "session_header",
                "scenario": wire.to_wire(self.cfg),
                "session": self.id,
                "ticks": self.mission._ticks,
            }
            fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
            for ev in self.log:
                fh.write(wire.dumps(ev))
                fh.write("\n")


def _world_outline(mission: Mission) -> WorldModel:
    """World geometry for clients; victim positions stay server-side."""
    w = mission.world
    return WorldModel(
        w.x_min, w.x_max, w.y_min, w.y_max, w.z_max,
        obstacles=list(w.obstacles), victims=[],
    )


def open_session(cfg: ScenarioConfig = None, mode: str = "live") -> Session:
    """Initialize a paused session with a state snapshot available."""
    return Session(cfg or ScenarioConfig(), mode=mode)


def read_log(path):
    """(scenario, session_id, ticks, [WireEvent]) from a session log file."""
    with open(path) as fh:
        first = fh.readline()
        if not first.strip():
            raise CorruptTrace("empty log file", offset=1)
        try:
            header = json.loads(first)
            if header.get("type") != "session_header":
                raise ValueError("missing session_header")
            cfg = ScenarioConfig.from_dict(header["scenario"])
            ticks = header["ticks"]
            session_id = header.get("session", "s?")
        except (json.JSONDecodeError, KeyError, ValueError, TypeError, InvalidScenario) as exc:
            raise CorruptTrace(f"bad header: {exc}", offset=1) from exc
        events = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                ev = wire.loads(line)
                if not isinstance(ev, WireEvent):
                    raise ValueError(f"unexpected record {type(ev).__name__}")
                events.append(ev)
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise CorruptTrace(str(exc), offset=lineno) from exc
    return cfg, session_id, ticks, events


def replay_file(path) -> Session:
    """Re-run a recorded session from its own log (determinism contract)."""
    cfg, session_id, ticks, events = read_log(path)
    inputs = [ev.payload for ev in events if isinstance(ev.payload, OperatorEvent)]
    session = Session(cfg, mode="replay", session_id=session_id)
    session.run(inputs, until_s=ticks * cfg.tick_dt)
    return session
