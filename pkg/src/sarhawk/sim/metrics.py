"""Mission metrics: what the case-study tables report, accumulated per tick."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .. import wire


@dataclass
class MissionMetrics:
    victims_total: int = 0
    detected: int = 0
    time_to_detect: list = field(default_factory=list)   # per confirmed victim
    selection_time: dict = field(default_factory=dict)   # bucket -> seconds
    mode_time: dict = field(default_factory=dict)        # drone -> mode -> seconds
    interaction_counts: dict = field(default_factory=dict)  # modality -> count
    elapsed: float = 0.0

    def accumulate_tick(self, dt: float, selection_bucket: str, drone_modes: dict):
        self.elapsed += dt
        self.selection_time[selection_bucket] = (
            self.selection_time.get(selection_bucket, 0.0) + dt
        )
        for drone_id, mode in drone_modes.items():
            per = self.mode_time.setdefault(drone_id, {})
            per[mode] = per.get(mode, 0.0) + dt

    def count_interaction(self, modality: str):
        self.interaction_counts[modality] = self.interaction_counts.get(modality, 0) + 1

    def record_detection(self, t: float):
        self.detected += 1
        self.time_to_detect.append(t)


wire.register(
    "metrics",
    MissionMetrics,
    lambda m: {
        "victims_total": m.victims_total,
        "detected": m.detected,
        "time_to_detect": [float(t) for t in m.time_to_detect],
        "selection_time": {k: float(v) for k, v in sorted(m.selection_time.items())},
        "mode_time": {
            d: {k: float(v) for k, v in sorted(per.items())}
            for d, per in sorted(m.mode_time.items())
        },
        "interaction_counts": dict(sorted(m.interaction_counts.items())),
        "elapsed": float(m.elapsed),
    },
    lambda d: MissionMetrics(
        victims_total=d["victims_total"],
        detected=d["detected"],
        time_to_detect=list(d["time_to_detect"]),
        selection_time=dict(d["selection_time"]),
        mode_time={k: dict(v) for k, v in d["mode_time"].items()},
        interaction_counts=dict(d["interaction_counts"]),
        elapsed=d["elapsed"],
    ),
)


def _stats(values):
    if not values:
        return {"avg": math.nan, "min": math.nan, "max": math.nan, "std": math.nan}
    n = len(values)
    avg = sum(values) / n
    var = sum((v - avg) ** 2 for v in values) / n
    return {"avg": avg, "min": min(values), "max": max(values), "std": math.sqrt(var)}


def report_text(runs, label="mission") -> str:
    """Plain-text summary over a batch of runs, in the case-study layout:
    victims found and detection times, selection balance, operative modes."""
    lines = []
    victims = [r.detected for r in runs]
    times = [t for r in runs for t in r.time_to_detect]
    v, t = _stats(victims), _stats(times)
    lines.append(f"== {label}: {len(runs)} runs ==")
    lines.append("Victims found        avg {avg:6.2f}  min {min:4.0f}  max {max:4.0f}  std {std:5.2f}".format(**v))
    if times:
        lines.append("Time to detect (s)   avg {avg:6.1f}  min {min:6.1f}  max {max:6.1f}  std {std:5.1f}".format(**t))

    buckets = sorted({b for r in runs for b in r.selection_time})
    if buckets:
        lines.append("Selection time (s):")
        for b in buckets:
            vals = [r.selection_time.get(b, 0.0) for r in runs]
            lines.append(f"  {b:12} avg {sum(vals)/len(vals):7.1f}")

    drones = sorted({d for r in runs for d in r.mode_time})
    if drones:
        lines.append("Operative mode time (s, avg per run):")
        modes = sorted({m for r in runs for per in r.mode_time.values() for m in per})
        header = "  drone     " + "".join(f"{m:>18}" for m in modes)
        lines.append(header)
        for d in drones:
            row = f"  {d:8}"
            for m in modes:
                vals = [r.mode_time.get(d, {}).get(m, 0.0) for r in runs]
                row += f"{sum(vals)/len(vals):18.1f}"
            lines.append(row)

    counts = {}
    for r in runs:
        for k, n in r.interaction_counts.items():
            counts[k] = counts.get(k, 0) + n
    if counts:
        lines.append("Interaction types: " + ", ".join(f"{k}={n}" for k, n in sorted(counts.items())))
    return "\n".join(lines)
