"""Arm-gesture classification from IMU motion traces.

Pipeline per trace: threshold denoise, arc-length resample to a fixed
m-point polyline, rotate each point into the world frame and subtract
gravity, then Euclidean scoring against a template bank. Robustness comes
from scoring several start-cropped slide variants of the trace and from an
orientation re-rank when the two best labels score nearly the same.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels, quat
from .errors import CorruptTrace, DegenerateTrace, DimensionMismatch, EmptyTrainingSet
from .model import Command, NBestEntry, NBestList, Source, Verb

GRAVITY = np.array([0.0, 0.0, 9.81])

GESTURE_LABELS = (
    "brake",
    "go_ahead",
    "go_backward",
    "go_down",
    "go_left",
    "go_right",
    "go_up",
    "rotate_anticlockwise",
    "rotate_clockwise",
    "search_creeping_line",
    "search_expanding",
    "search_parallel_track",
    "faster",
    "slower",
)

_LABEL_VERBS = {
    "brake": (Verb.BRAKE, None),
    "go_ahead": (Verb.GO, "ahead"),
    "go_backward": (Verb.GO, "backward"),
    "go_down": (Verb.GO, "down"),
    "go_left": (Verb.GO, "left"),
    "go_right": (Verb.GO, "right"),
    "go_up": (Verb.GO, "up"),
    "rotate_anticlockwise": (Verb.ROTATE_ANTICLOCKWISE, None),
    "rotate_clockwise": (Verb.ROTATE_CLOCKWISE, None),
    "search_creeping_line": (Verb.SEARCH_CREEPING_LINE, None),
    "search_expanding": (Verb.SEARCH_EXPANDING, None),
    "search_parallel_track": (Verb.SEARCH_PARALLEL_TRACK, None),
    "faster": (Verb.FASTER, None),
    "slower": (Verb.SLOWER, None),
}


def label_to_command(label: str, confidence: float, timestamp: float) -> Command:
    verb, direction = _LABEL_VERBS[label]
    return Command(
        verb=verb,
        direction=direction,
        confidence=confidence,
        source=Source.GESTURE,
        timestamp=timestamp,
    )


@dataclass(frozen=True)
class IMUSample:
    timestamp: float
    acceleration: tuple      # sensor frame, m/s^2
    orientation: tuple       # unit quaternion (w, x, y, z), sensor -> world

    def __post_init__(self):
        n = np.linalg.norm(self.orientation)
        if not np.isfinite(n) or abs(n - 1.0) > 1e-6:
            raise ValueError("orientation quaternion not unit length")
        if not np.all(np.isfinite(self.acceleration)):
            raise ValueError("non-finite acceleration")


@dataclass(frozen=True)
class MotionTrace:
    samples: tuple

    def __post_init__(self):
        if len(self.samples) < 2:
            raise ValueError("trace needs at least 2 samples")
        ts = [s.timestamp for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("timestamps must be strictly increasing")

    @property
    def duration(self) -> float:
        return self.samples[-1].timestamp - self.samples[0].timestamp

    def accelerations(self) -> np.ndarray:
        return np.array([s.acceleration for s in self.samples])

    def orientations(self) -> np.ndarray:
        return np.array([s.orientation for s in self.samples])


@dataclass(frozen=True)
class GestureTemplate:
    label: str
    points: np.ndarray           # (m, 3) processed accelerations
    mean_orientation: np.ndarray  # unit 3-vector


@dataclass
class TrainingSet:
    m: int = 32
    templates: list = field(default_factory=list)

    def labels(self):
        return sorted({t.label for t in self.templates})

    def bank(self) -> np.ndarray:
        return np.stack([t.points for t in self.templates])


@dataclass(frozen=True)
class GestureConfig:
    m: int = 32
    epsilon: float = 0.05            # m/s^2, denoise threshold
    slides: int = 3                  # variants cropped from the start
    slide_stride_frac: float = 0.10  # of trace duration
    tie_threshold: float = 0.05      # relative top-2 gap for the re-rank
    nbest: int = 5


def denoise(trace: MotionTrace, epsilon: float) -> MotionTrace:
    """Drop sample i when |a_i - a_{i-1}| < epsilon; the first sample stays."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    acc = trace.accelerations()
    keep = [trace.samples[0]]
    deltas = np.linalg.norm(np.diff(acc, axis=0), axis=1)
    for i in range(1, len(trace.samples)):
        if deltas[i - 1] >= epsilon:
            keep.append(trace.samples[i])
    if len(keep) < 2:
        raise DegenerateTrace(f"{len(keep)} samples survive denoise")
    return MotionTrace(tuple(keep))


def resample(trace: MotionTrace, m: int):
    """m acceleration points equally spaced along the trace's arc length.

    Also returns the matching per-point orientations (slerped between the
    bracketing samples) so the world-frame step has one rotation per point.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    acc = trace.accelerations()
    try:
        points, srcpos = kernels.resample_polyline(acc, m)
    except ValueError as exc:
        raise DegenerateTrace(str(exc)) from exc
    quats = trace.orientations()
    orientations = np.empty((m, 4))
    for i, pos in enumerate(srcpos):
        j = min(int(pos), len(quats) - 2)
        f = pos - j
        orientations[i] = quat.slerp(quats[j], quats[j + 1], f)
    return points, orientations


def to_world_frame(points: np.ndarray, orientations: np.ndarray) -> np.ndarray:
    """Rotate sensor-frame accelerations into the world frame and remove
    gravity: a' = R_S^W a - g."""
    if len(points) != len(orientations):
        raise DimensionMismatch("one orientation per point required")
    out = np.empty_like(points)
    for i in range(len(points)):
        out[i] = quat.rotate(orientations[i], points[i]) - GRAVITY
    return out


def mean_orientation(points: np.ndarray) -> np.ndarray:
    """Average direction of the processed acceleration points (unit vector)."""
    norms = np.linalg.norm(points, axis=1)
    mask = norms > 1e-9
    if not np.any(mask):
        return np.array([0.0, 0.0, 0.0])
    dirs = points[mask] / norms[mask, None]
    total = dirs.sum(axis=0)
    n = np.linalg.norm(total)
    return total / n if n > 1e-12 else np.array([0.0, 0.0, 0.0])


def preprocess(trace: MotionTrace, cfg: GestureConfig) -> np.ndarray:
    """Full pipeline: denoise, resample, world-frame. Returns (m, 3) points."""
    clean = denoise(trace, cfg.epsilon)
    points, orientations = resample(clean, cfg.m)
    return to_world_frame(points, orientations)


def score(g: np.ndarray, t: GestureTemplate) -> float:
    """Euclidean distance between two processed m-point gestures."""
    if len(g) != len(t.points):
        raise DimensionMismatch(f"{len(g)} vs {len(t.points)} points")
    return float(np.sqrt(np.sum((np.asarray(g) - t.points) ** 2)))


def slide_variants(trace: MotionTrace, cfg: GestureConfig):
    """Start-cropped copies of the trace within a sliding time window."""
    variants = [trace]
    stride = cfg.slide_stride_frac * trace.duration
    t0 = trace.samples[0].timestamp
    for k in range(1, cfg.slides):
        cut = t0 + k * stride
        rest = tuple(s for s in trace.samples if s.timestamp >= cut)
        if len(rest) >= 2:
            variants.append(MotionTrace(rest))
    return variants


def add_template(ts: TrainingSet, trace: MotionTrace, label: str) -> TrainingSet:
    cfg = GestureConfig(m=ts.m)
    points = preprocess(trace, cfg)
    tpl = GestureTemplate(label=label, points=points, mean_orientation=mean_orientation(points))
    return TrainingSet(m=ts.m, templates=ts.templates + [tpl])


def classify(trace: MotionTrace, ts: TrainingSet, cfg: GestureConfig = GestureConfig()) -> NBestList:
    """Rank gesture labels for a trace against the training set.

    Every slide variant runs the preprocessing pipeline and is scored
    against the whole bank; each label keeps its best (minimum) distance.
    Confidence is 1 / (1 + distance). When the two best labels land within
    ``tie_threshold`` relative distance, the one whose template orientation
    is closer to the performed gesture's wins.
    """
    if not ts.templates:
        raise EmptyTrainingSet("no templates loaded")
    if cfg.m != ts.m:
        raise DimensionMismatch(f"config m={cfg.m} but training set m={ts.m}")

    processed = []
    first_error = None
    for variant in slide_variants(trace, cfg):
        try:
            processed.append(preprocess(variant, cfg))
        except DegenerateTrace as exc:
            if first_error is None:
                first_error = exc
    if not processed:
        raise first_error or DegenerateTrace("no usable slide variant")

    scores = kernels.batch_scores(np.stack(processed), ts.bank())
    best_per_template = scores.min(axis=0)

    best = {}
    for tpl, s in zip(ts.templates, best_per_template):
        if tpl.label not in best or s < best[tpl.label][0]:
            best[tpl.label] = (float(s), tpl)
    ranked = sorted(best.items(), key=lambda kv: (kv[1][0], kv[0]))

    if len(ranked) >= 2 and cfg.tie_threshold > 0:
        s1, s2 = ranked[0][1][0], ranked[1][1][0]
        if s2 - s1 <= cfg.tie_threshold * max(s2, 1e-12):
            probe_dir = mean_orientation(processed[0])
            a1 = float(np.dot(probe_dir, ranked[0][1][1].mean_orientation))
            a2 = float(np.dot(probe_dir, ranked[1][1][1].mean_orientation))
            if a2 > a1:
                ranked[0], ranked[1] = ranked[1], ranked[0]

    # keep the re-ranked order even where confidences cross
    entries = [(label, 1.0 / (1.0 + s)) for label, (s, _tpl) in ranked[: cfg.nbest]]
    return NBestList(tuple(NBestEntry(lbl, c) for lbl, c in entries), cfg.nbest)


# ---------------------------------------------------------------------------
# Raw IMU log files: one JSON record per line, samples plus pose markers.
# Format documented in docs/protocol.md; round trips are bit-exact.


def write_imu_log(path, entries):
    """entries: iterable of IMUSample or (timestamp, pose-string) markers."""
    with open(path, "w") as fh:
        for e in entries:
            if isinstance(e, IMUSample):
                rec = {
                    "acc": [float(c) for c in e.acceleration],
                    "quat": [float(c) for c in e.orientation],
                    "t": float(e.timestamp),
                    "type": "imu",
                }
            else:
                t, pose = e
                rec = {"pose": pose, "t": float(t), "type": "pose_marker"}
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_imu_log(path):
    entries = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rec = json.loads(line)
                if rec["type"] == "imu":
                    entries.append(
                        IMUSample(rec["t"], tuple(rec["acc"]), tuple(rec["quat"]))
                    )
                elif rec["type"] == "pose_marker":
                    entries.append((rec["t"], rec["pose"]))
                else:
                    raise ValueError(f"unknown record type {rec['type']!r}")
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise CorruptTrace(str(exc), offset=lineno) from exc
    return entries


class TraceRecorder:
    """Segments a raw sample stream into traces using hand-pose markers.

    Samples only accumulate while the hand is closed; the close -> open
    transition emits the finished MotionTrace (or None when too short).
    """

    def __init__(self):
        self._closed = False
        self._samples = []

    def feed_pose(self, pose: str):
        if pose == "closed" and not self._closed:
            self._closed = True
            self._samples = []
            return None
        if pose != "closed" and self._closed:
            self._closed = False
            samples, self._samples = self._samples, []
            if len(samples) >= 2:
                return MotionTrace(tuple(samples))
        return None

    def feed_sample(self, sample: IMUSample):
        if self._closed:
            self._samples.append(sample)

    @property
    def recording(self) -> bool:
        return self._closed


def segment_log(entries):
    """Split a raw IMU log into the traces delimited by pose markers."""
    rec = TraceRecorder()
    traces = []
    for e in entries:
        if isinstance(e, IMUSample):
            rec.feed_sample(e)
        else:
            t, pose = e
            done = rec.feed_pose(pose)
            if done is not None:
                traces.append(done)
    return traces
