"""Canonical text interchange format.

Every value type serializes to a JSON object with a ``type`` tag; files are
line-oriented (one JSON object per line, sorted keys, compact separators).
Python's shortest-repr float formatting makes round trips bit-exact.
Schema reference: docs/protocol.md.
"""

from __future__ import annotations

import json

import numpy as np

from . import model
from .errors import CorruptTrace

_ENCODERS = {}   # class -> (tag, encode_fn)
_DECODERS = {}   # tag -> decode_fn


def register(tag, cls, encode, decode):
    """Register a codec for one value type. Later registrations win."""
    _ENCODERS[cls] = (tag, encode)
    _DECODERS[tag] = decode


def to_wire(obj) -> dict:
    entry = _ENCODERS.get(type(obj))
    if entry is None:
        raise TypeError(f"no wire codec for {type(obj).__name__}")
    tag, encode = entry
    body = encode(obj)
    body["type"] = tag
    return body


def from_wire(data: dict):
    tag = data.get("type")
    decode = _DECODERS.get(tag)
    if decode is None:
        raise ValueError(f"unknown wire type {tag!r}")
    return decode(data)


def dumps(obj) -> str:
    """One canonical JSON line (no trailing newline)."""
    return json.dumps(to_wire(obj), sort_keys=True, separators=(",", ":"))


def loads(line: str):
    return from_wire(json.loads(line))


def dump_lines(objs, path):
    with open(path, "w") as fh:
        for obj in objs:
            fh.write(dumps(obj))
            fh.write("\n")


def load_lines(path):
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                out.append(loads(line))
            except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
                raise CorruptTrace(str(exc), offset=lineno) from exc
    return out


# ---------------------------------------------------------------------------
# helpers


def _vec(v):
    return [float(c) for c in v]


def _sel_out(sel):
    if sel is None:
        return None
    if sel == model.ALL:
        return "all"
    return sorted(sel)


def _sel_in(raw):
    if raw is None:
        return None
    if raw == "all":
        return model.ALL
    return frozenset(raw)


def _opt_float(v):
    return None if v is None else float(v)


# ---------------------------------------------------------------------------
# model codecs


def _enc_command(c: model.Command) -> dict:
    return {
        "verb": c.verb.value,
        "selection": _sel_out(c.selection),
        "confidence": float(c.confidence),
        "source": c.source.value,
        "timestamp": float(c.timestamp),
        "hour": c.hour,
        "direction": c.direction,
        "distance": _opt_float(c.distance),
        "target": None if c.target is None else _vec(c.target),
        "mode": c.mode,
        "angle": _opt_float(c.angle),
        "defaulted": sorted(c.defaulted),
    }


def _dec_command(d: dict) -> model.Command:
    return model.Command(
        verb=model.Verb(d["verb"]),
        selection=_sel_in(d.get("selection")),
        confidence=d["confidence"],
        source=model.Source(d["source"]),
        timestamp=d["timestamp"],
        hour=d.get("hour"),
        direction=d.get("direction"),
        distance=d.get("distance"),
        target=None if d.get("target") is None else tuple(d["target"]),
        mode=d.get("mode"),
        angle=d.get("angle"),
        defaulted=frozenset(d.get("defaulted") or ()),
    )


register("command", model.Command, _enc_command, _dec_command)


register(
    "fragment",
    model.Fragment,
    lambda f: {
        "kind": f.kind,
        "value": list(f.value) if isinstance(f.value, tuple) else f.value,
        "confidence": float(f.confidence),
        "timestamp": float(f.timestamp),
    },
    lambda d: model.Fragment(
        d["kind"],
        tuple(d["value"]) if isinstance(d["value"], list) else d["value"],
        d.get("confidence", 1.0),
        d.get("timestamp", 0.0),
    ),
)


def _enc_nbest(nb: model.NBestList) -> dict:
    entries = []
    for e in nb.entries:
        interp = e.interpretation
        if isinstance(interp, (model.Command, model.Fragment)):
            interp = to_wire(interp)
        entries.append({"interpretation": interp, "score": float(e.score)})
    return {"entries": entries, "limit": nb.limit}


def _dec_nbest(d: dict) -> model.NBestList:
    entries = []
    for e in d["entries"]:
        interp = e["interpretation"]
        if isinstance(interp, dict):
            interp = from_wire(interp)
        entries.append(model.NBestEntry(interp, e["score"]))
    return model.NBestList(tuple(entries), d.get("limit", 5))


register("nbest", model.NBestList, _enc_nbest, _dec_nbest)


register(
    "drone",
    model.DroneState,
    lambda s: {
        "id": s.id,
        "position": _vec(s.position),
        "velocity": _vec(s.velocity),
        "yaw": float(s.yaw),
        "mode": s.mode.value,
        "active_task": None if s.active_task is None else s.active_task.value,
        "battery_s": float(s.battery_s),
    },
    lambda d: model.DroneState(
        id=d["id"],
        position=np.array(d["position"]),
        velocity=np.array(d["velocity"]),
        yaw=d["yaw"],
        mode=model.Mode(d["mode"]),
        active_task=None if d.get("active_task") is None else model.Verb(d["active_task"]),
        battery_s=d["battery_s"],
    ),
)

register(
    "sphere",
    model.Sphere,
    lambda s: {"center": _vec(s.center), "radius": float(s.radius)},
    lambda d: model.Sphere(tuple(d["center"]), d["radius"]),
)

register(
    "box",
    model.Box,
    lambda b: {"lo": _vec(b.lo), "hi": _vec(b.hi)},
    lambda d: model.Box(tuple(d["lo"]), tuple(d["hi"])),
)

register(
    "victim",
    model.Victim,
    lambda v: {"position": _vec(v.position), "found": v.found},
    lambda d: model.Victim(tuple(d["position"]), d["found"]),
)

register(
    "world",
    model.WorldModel,
    lambda w: {
        "x_min": float(w.x_min),
        "x_max": float(w.x_max),
        "y_min": float(w.y_min),
        "y_max": float(w.y_max),
        "z_max": float(w.z_max),
        "obstacles": [to_wire(o) for o in w.obstacles],
        "victims": [to_wire(v) for v in w.victims],
    },
    lambda d: model.WorldModel(
        x_min=d["x_min"],
        x_max=d["x_max"],
        y_min=d["y_min"],
        y_max=d["y_max"],
        z_max=d["z_max"],
        obstacles=[from_wire(o) for o in d.get("obstacles", [])],
        victims=[from_wire(v) for v in d.get("victims", [])],
    ),
)


# operator event payloads

register(
    "transcript",
    model.Transcript,
    lambda t: {"text": t.text, "asr_confidence": _opt_float(t.asr_confidence)},
    lambda d: model.Transcript(d["text"], d.get("asr_confidence")),
)

register(
    "pose",
    model.PoseChange,
    lambda p: {"pose": p.pose},
    lambda d: model.PoseChange(d["pose"]),
)

register(
    "pointing",
    model.PointingRay,
    lambda p: {"origin": _vec(p.origin), "direction": _vec(p.direction)},
    lambda d: model.PointingRay(tuple(d["origin"]), tuple(d["direction"])),
)

register(
    "joystick",
    model.JoystickDelta,
    lambda j: {"delta": _vec(j.delta)},
    lambda d: model.JoystickDelta(tuple(d["delta"])),
)

register("mark", model.Mark, lambda m: {}, lambda d: model.Mark())

register(
    "imu_trace",
    model.TracePayload,
    lambda t: {
        "samples": [
            {"t": float(ts), "acc": _vec(acc), "quat": _vec(quat)}
            for ts, acc, quat in t.samples
        ]
    },
    lambda d: model.TracePayload(
        tuple((s["t"], tuple(s["acc"]), tuple(s["quat"])) for s in d["samples"])
    ),
)

register(
    "event",
    model.OperatorEvent,
    lambda e: {"timestamp": float(e.timestamp), "payload": to_wire(e.payload)},
    lambda d: model.OperatorEvent(d["timestamp"], from_wire(d["payload"])),
)
