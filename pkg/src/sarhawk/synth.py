"""Synthetic gesture corpus.

Each of the 14 gesture classes is a parametric curve in linear-acceleration
space. Traces are rendered into sensor frame under a random armband mounting
rotation (with matching orientation quaternions), so the world-frame pipeline
has real work to undo. Probes add Gaussian noise scaled by the signal RMS.
"""

from __future__ import annotations

import json

import numpy as np

from . import quat
from .errors import CorruptTrace
from .gesture import GESTURE_LABELS, GRAVITY, IMUSample, MotionTrace


def _bump(u):
    return np.sin(np.pi * u)


def _triangle(u, periods):
    ph = (u * periods) % 1.0
    return np.where(ph < 0.5, 4.0 * ph - 1.0, 3.0 - 4.0 * ph)


def _shape(label: str, u: np.ndarray) -> np.ndarray:
    """World-frame linear acceleration curve for one gesture class, unit scale."""
    z = np.zeros_like(u)
    if label == "go_up":
        return np.stack([0.15 * _bump(u), z, _bump(u)], axis=1)
    if label == "go_down":
        return np.stack([0.15 * _bump(u), z, -_bump(u)], axis=1)
    if label == "go_left":
        return np.stack([z, _bump(u), 0.15 * _bump(u)], axis=1)
    if label == "go_right":
        return np.stack([z, -_bump(u), 0.15 * _bump(u)], axis=1)
    if label == "go_ahead":
        return np.stack([_bump(u), z, 0.15 * _bump(u)], axis=1)
    if label == "go_backward":
        return np.stack([-_bump(u), z, 0.15 * _bump(u)], axis=1)
    if label == "brake":
        return np.stack([np.sin(2 * np.pi * u), z, 0.4 * _bump(u)], axis=1)
    if label == "faster":
        return np.stack([np.abs(np.sin(2 * np.pi * u)), 0.3 * np.sin(2 * np.pi * u), z], axis=1)
    if label == "slower":
        return np.stack([-np.abs(np.sin(2 * np.pi * u)), 0.3 * np.sin(2 * np.pi * u), z], axis=1)
    if label == "rotate_clockwise":
        return np.stack([np.cos(2 * np.pi * u), -np.sin(2 * np.pi * u), z], axis=1)
    if label == "rotate_anticlockwise":
        return np.stack([np.cos(2 * np.pi * u), np.sin(2 * np.pi * u), z], axis=1)
    if label == "search_expanding":
        return np.stack([u * np.cos(4 * np.pi * u), u * np.sin(4 * np.pi * u), z], axis=1)
    if label == "search_parallel_track":
        return np.stack([_triangle(u, 2.5), 2.0 * u - 1.0, z], axis=1)
    if label == "search_creeping_line":
        return np.stack([2.0 * u - 1.0, _triangle(u, 2.5), z], axis=1)
    raise KeyError(label)


def world_curve(label: str, n: int, rng: np.random.Generator,
                amplitude: float = 4.0, wobble: float = 0.03) -> np.ndarray:
    """One gesture instance in world linear-acceleration coordinates."""
    u = np.linspace(0.0, 1.0, n)
    # mild nonlinear time warp models execution-speed variation
    warp = wobble * np.sin(2 * np.pi * u * rng.uniform(0.5, 1.5) + rng.uniform(0, 2 * np.pi))
    u = np.clip(u + warp, 0.0, 1.0)
    scale = amplitude * rng.normal(1.0, 0.05)
    pts = _shape(label, u) * scale
    tilt = quat.from_axis_angle([0, 0, 1], np.radians(rng.normal(0.0, 4.0)))
    return pts @ quat.to_matrix(tilt).T


def render_trace(world_accel: np.ndarray, rng: np.random.Generator,
                 duration: float | None = None,
                 noise_rms_frac: float = 0.0) -> MotionTrace:
    """Express a world-frame curve as sensor-frame IMU samples.

    A random fixed mounting rotation maps world accelerations (plus gravity)
    into the sensor frame; the matching quaternion rides along on every
    sample. Gaussian noise is scaled by the curve's RMS magnitude.
    """
    n = len(world_accel)
    if duration is None:
        duration = rng.uniform(0.9, 1.4)
    t0 = rng.uniform(0.0, 5.0)
    times = t0 + np.linspace(0.0, duration, n)

    if noise_rms_frac > 0.0:
        rms = float(np.sqrt(np.mean(np.sum(world_accel**2, axis=1))))
        world_accel = world_accel + rng.normal(0.0, noise_rms_frac * rms, world_accel.shape)

    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    q_sw = quat.from_axis_angle(axis, rng.uniform(0.0, 2 * np.pi))
    r_ws = quat.to_matrix(q_sw).T  # world -> sensor
    samples = []
    for i in range(n):
        a_sensor = r_ws @ (world_accel[i] + GRAVITY)
        samples.append(IMUSample(float(times[i]), tuple(a_sensor), tuple(q_sw)))
    return MotionTrace(tuple(samples))


def make_trace(label: str, rng: np.random.Generator, n: int = 60,
               noise_rms_frac: float = 0.0) -> MotionTrace:
    return render_trace(world_curve(label, n, rng), rng, noise_rms_frac=noise_rms_frac)


def make_corpus(seed: int, templates_per_label: int = 10, probes_per_label: int = 30,
                probe_noise: float = 0.05, labels=GESTURE_LABELS):
    """(train, test) lists of (label, MotionTrace) for classifier evaluation."""
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label in labels:
        for _ in range(templates_per_label):
            train.append((label, make_trace(label, rng)))
        for _ in range(probes_per_label):
            test.append((label, make_trace(label, rng, noise_rms_frac=probe_noise)))
    return train, test


# labeled-trace corpus files (JSONL), consumed by `sarhawk gesture eval`


def write_corpus(path, labeled_traces):
    with open(path, "w") as fh:
        for label, trace in labeled_traces:
            rec = {
                "label": label,
                "samples": [
                    {
                        "acc": [float(c) for c in s.acceleration],
                        "quat": [float(c) for c in s.orientation],
                        "t": float(s.timestamp),
                    }
                    for s in trace.samples
                ],
            }
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_corpus(path):
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                samples = tuple(
                    IMUSample(s["t"], tuple(s["acc"]), tuple(s["quat"]))
                    for s in rec["samples"]
                )
                out.append((rec["label"], MotionTrace(samples)))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise CorruptTrace(str(exc), offset=lineno) from exc
    return out
