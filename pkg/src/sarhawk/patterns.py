"""Aerial search patterns: parallel track, creeping line, expanding square."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .planning import Path

KINDS = ("expanding", "parallel_track", "creeping_line")


@dataclass(frozen=True)
class SearchPatternSpec:
    kind: str
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    spacing: float
    altitude: float
    entry: Optional[tuple] = None  # expanding-square center; area center if None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("degenerate area")


def _leg_offsets(extent: float, spacing: float):
    """Across-track leg positions: never further than spacing/2 from any
    covered coordinate, never more than spacing apart."""
    if extent <= spacing:
        return [extent / 2.0]
    n = math.ceil(extent / spacing)
    return [min(spacing / 2.0 + k * spacing, extent - spacing / 2.0) for k in range(n)]


def _lawnmower(spec: SearchPatternSpec, legs_along_x: bool) -> Path:
    width = spec.x_max - spec.x_min
    height = spec.y_max - spec.y_min
    z = spec.altitude
    waypoints = []
    if legs_along_x:
        for i, off in enumerate(_leg_offsets(height, spec.spacing)):
            y = spec.y_min + off
            xs = (spec.x_min, spec.x_max) if i % 2 == 0 else (spec.x_max, spec.x_min)
            waypoints += [(xs[0], y, z), (xs[1], y, z)]
    else:
        for i, off in enumerate(_leg_offsets(width, spec.spacing)):
            x = spec.x_min + off
            ys = (spec.y_min, spec.y_max) if i % 2 == 0 else (spec.y_max, spec.y_min)
            waypoints += [(x, ys[0], z), (x, ys[1], z)]
    return Path.from_waypoints(waypoints)


def _expanding_square(spec: SearchPatternSpec) -> Path:
    if spec.entry is not None:
        cx, cy = spec.entry[0], spec.entry[1]
    else:
        cx = (spec.x_min + spec.x_max) / 2.0
        cy = (spec.y_min + spec.y_max) / 2.0
    z = spec.altitude
    headings = [(1, 0), (0, 1), (-1, 0), (0, -1)]  # E, N, W, S
    waypoints = [(cx, cy, z)]
    x, y = cx, cy
    k = 1
    while True:
        length = math.ceil(k / 2) * spec.spacing
        hx, hy = headings[(k - 1) % 4]
        nx, ny = x + hx * length, y + hy * length
        if not (spec.x_min <= nx <= spec.x_max and spec.y_min <= ny <= spec.y_max):
            break
        waypoints.append((nx, ny, z))
        x, y = nx, ny
        k += 1
    return Path.from_waypoints(waypoints)


def generate_pattern(spec: SearchPatternSpec) -> Path:
    """Waypoint path scanning the area at constant altitude.

    Parallel track runs its legs along the long axis of the area, creeping
    line along the short axis, the expanding square spirals out from the
    entry point with leg lengths s, s, 2s, 2s, 3s, 3s, ...
    """
    width = spec.x_max - spec.x_min
    height = spec.y_max - spec.y_min
    if spec.kind == "parallel_track":
        return _lawnmower(spec, legs_along_x=width >= height)
    if spec.kind == "creeping_line":
        return _lawnmower(spec, legs_along_x=width < height)
    return _expanding_square(spec)


def max_distance_to_path(path: Path, spec: SearchPatternSpec, grid_step: float = 1.0) -> float:
    """Worst-case horizontal distance from area grid points to the path."""
    xs = np.arange(spec.x_min, spec.x_max + grid_step * 0.5, grid_step)
    ys = np.arange(spec.y_min, spec.y_max + grid_step * 0.5, grid_step)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)

    best = np.full(len(pts), np.inf)
    wp = path.waypoints[:, :2]
    for a, b in zip(wp, wp[1:]):
        d = b - a
        dd = float(np.dot(d, d))
        if dd == 0.0:
            dist = np.linalg.norm(pts - a, axis=1)
        else:
            t = np.clip((pts - a) @ d / dd, 0.0, 1.0)
            closest = a + t[:, None] * d
            dist = np.linalg.norm(pts - closest, axis=1)
        best = np.minimum(best, dist)
    return float(best.max())
