"""Quartic spline trajectories over waypoint paths.

One degree-4 polynomial per axis per waypoint pair. Each segment pins
start position/velocity/acceleration (chained from the previous segment)
plus end position and velocity, so position, velocity, and acceleration
are all continuous across knots by construction. Endpoints are at rest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleDynamics
from .planning import Path

# peak/average speed ratio of a rest-to-rest quartic; sets segment timing
_SHAPE = 1.6
_PEAK_ACCEL_COEFF = 4.69  # max accel of a rest-to-rest quartic ~ 4.69 v^2 / L


@dataclass(frozen=True)
class TrajectorySegment:
    coeffs: np.ndarray   # (3, 5), per-axis c0..c4
    duration: float

    def position(self, t: float) -> np.ndarray:
        powers = np.array([1.0, t, t * t, t**3, t**4])
        return self.coeffs @ powers

    def velocity(self, t: float) -> np.ndarray:
        powers = np.array([0.0, 1.0, 2 * t, 3 * t * t, 4 * t**3])
        return self.coeffs @ powers

    def acceleration(self, t: float) -> np.ndarray:
        powers = np.array([0.0, 0.0, 2.0, 6 * t, 12 * t * t])
        return self.coeffs @ powers


@dataclass(frozen=True)
class Trajectory:
    segments: tuple
    knot_times: tuple  # cumulative start times, len(segments) + 1

    @property
    def duration(self) -> float:
        return self.knot_times[-1]

    def _locate(self, t: float):
        t = min(max(t, 0.0), self.duration)
        for i, seg in enumerate(self.segments):
            if t <= self.knot_times[i + 1] or i == len(self.segments) - 1:
                return seg, t - self.knot_times[i]
        raise AssertionError("unreachable")

    def position(self, t: float) -> np.ndarray:
        seg, tau = self._locate(t)
        return seg.position(tau)

    def velocity(self, t: float) -> np.ndarray:
        seg, tau = self._locate(t)
        return seg.velocity(tau)

    def acceleration(self, t: float) -> np.ndarray:
        seg, tau = self._locate(t)
        return seg.acceleration(tau)

    def sample(self, dt: float):
        """(times, positions, velocities, accelerations) on a regular grid."""
        times = np.arange(0.0, self.duration + dt * 0.5, dt)
        pos = np.array([self.position(t) for t in times])
        vel = np.array([self.velocity(t) for t in times])
        acc = np.array([self.acceleration(t) for t in times])
        return times, pos, vel, acc


@dataclass(frozen=True)
class TrajConfig:
    cruise: float = 10.0      # m/s
    max_accel: float = 10.0   # m/s^2
    durations: Optional[tuple] = None  # explicit per-segment durations


def _segment(p0, v0, a0, p1, v1, duration):
    """Quartic coefficients pinning (p,v,a) at 0 and (p,v) at duration."""
    T = duration
    c = np.zeros((3, 5))
    c[:, 0] = p0
    c[:, 1] = v0
    c[:, 2] = a0 / 2.0
    dp = p1 - (p0 + v0 * T + 0.5 * a0 * T * T)
    dv = v1 - (v0 + a0 * T)
    # [T^3 T^4; 3T^2 4T^3] [c3 c4]^T = [dp dv]^T
    det = T**3 * 4 * T**3 - T**4 * 3 * T**2
    c[:, 3] = (4 * T**3 * dp - T**4 * dv) / det
    c[:, 4] = (T**3 * dv - 3 * T**2 * dp) / det
    return TrajectorySegment(c, T)


def build_trajectory(path: Path, cfg: TrajConfig = TrajConfig()) -> Trajectory:
    """Chain quartic segments over the path, at rest at both ends.

    Raises InfeasibleDynamics when any segment needs more acceleration
    than cfg.max_accel (checked on a dense sample grid).
    """
    wp = [np.asarray(p, dtype=float) for p in path.waypoints]
    wp = [wp[0]] + [p for prev, p in zip(wp, wp[1:]) if np.linalg.norm(p - prev) > 1e-12]
    if len(wp) < 2:
        raise ValueError("trajectory needs at least 2 distinct waypoints")

    lengths = [float(np.linalg.norm(b - a)) for a, b in zip(wp, wp[1:])]
    dirs = [(b - a) / l for a, b, l in zip(wp, wp[1:], lengths)]

    def seg_speed(length):
        return min(cfg.cruise, 0.6 * np.sqrt(cfg.max_accel * length / _PEAK_ACCEL_COEFF))

    # waypoint velocity targets: rest at the ends, turn-scaled cruise inside
    vels = [np.zeros(3)]
    for i in range(1, len(wp) - 1):
        bisect = dirs[i - 1] + dirs[i]
        norm = np.linalg.norm(bisect)
        if norm < 1e-9:
            vels.append(np.zeros(3))  # full reversal: stop at the corner
            continue
        heading = bisect / norm
        cos_half = max(0.0, float(np.dot(dirs[i - 1], heading)))
        speed = min(seg_speed(lengths[i - 1]), seg_speed(lengths[i])) * cos_half
        vels.append(heading * speed)
    vels.append(np.zeros(3))

    if cfg.durations is not None:
        if len(cfg.durations) != len(lengths):
            raise ValueError("durations must match segment count")
        durations = [float(d) for d in cfg.durations]
        if any(d <= 0 for d in durations):
            raise ValueError("segment durations must be positive")
    else:
        durations = [_SHAPE * l / max(seg_speed(l), 1e-9) for l in lengths]

    segments = []
    knots = [0.0]
    a0 = np.zeros(3)
    for i, T in enumerate(durations):
        seg = _segment(wp[i], vels[i], a0, wp[i + 1], vels[i + 1], T)
        segments.append(seg)
        knots.append(knots[-1] + T)
        a0 = seg.acceleration(T)

    traj = Trajectory(tuple(segments), tuple(knots))
    _check_accel(traj, cfg.max_accel)
    return traj


def _check_accel(traj: Trajectory, max_accel: float, samples_per_segment: int = 40):
    for seg in traj.segments:
        taus = np.linspace(0.0, seg.duration, samples_per_segment)
        peak = max(float(np.linalg.norm(seg.acceleration(t))) for t in taus)
        if peak > max_accel * 1.001:
            raise InfeasibleDynamics(
                f"requires {peak:.2f} m/s^2 but limit is {max_accel:.2f}"
            )
