"""Sampling-based path planning (RRT* with rewiring and shortcutting)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NoPath
from .model import Box, Sphere, WorldModel


@dataclass(frozen=True)
class Path:
    waypoints: np.ndarray  # (n, 3)
    cost: float

    @staticmethod
    def from_waypoints(waypoints) -> "Path":
        wp = np.atleast_2d(np.asarray(waypoints, dtype=float))
        cost = float(np.sum(np.linalg.norm(np.diff(wp, axis=0), axis=1))) if len(wp) > 1 else 0.0
        return Path(wp, cost)


@dataclass(frozen=True)
class PlanConfig:
    iterations: int = 2000
    step: float = 1.0            # steering step, meters
    goal_bias: float = 0.05
    gamma: float = 10.0          # rewire radius scale: gamma*(log n / n)^(1/3)
    goal_tolerance: float = 1.0
    shortcut_rounds: int = 200
    seed: int = 0


def obstacle_arrays(world: WorldModel):
    spheres = [(*o.center, o.radius) for o in world.obstacles if isinstance(o, Sphere)]
    boxes = [(*o.lo, *o.hi) for o in world.obstacles if isinstance(o, Box)]
    return (
        np.array(spheres, dtype=float).reshape(-1, 4),
        np.array(boxes, dtype=float).reshape(-1, 6),
    )


def segment_clear(p0, p1, obstacles) -> bool:
    spheres, boxes = obstacles
    if len(spheres) == 0 and len(boxes) == 0:
        return True
    return kernels.segment_clear(np.asarray(p0, float), np.asarray(p1, float), spheres, boxes)


def point_clear(p, obstacles) -> bool:
    spheres, boxes = obstacles
    if len(spheres) == 0 and len(boxes) == 0:
        return True
    return kernels.point_clear(np.asarray(p, float), spheres, boxes)


def path_clear(waypoints, world: WorldModel) -> bool:
    obs = obstacle_arrays(world)
    return all(
        segment_clear(waypoints[i], waypoints[i + 1], obs)
        for i in range(len(waypoints) - 1)
    )


def shortcut(waypoints, obstacles, rng, rounds: int):
    """Randomized shortcutting: splice out detours whose endpoints connect."""
    wp = [np.asarray(p, dtype=float) for p in waypoints]
    for _ in range(rounds):
        if len(wp) <= 2:
            break
        i = int(rng.integers(0, len(wp) - 1))
        j = int(rng.integers(0, len(wp) - 1))
        if abs(i - j) < 2:
            continue
        i, j = min(i, j), max(i, j)
        if segment_clear(wp[i], wp[j], obstacles):
            wp = wp[: i + 1] + wp[j:]
    return np.array(wp)


def plan_path_checkpoints(start, goal, world: WorldModel, cfg: PlanConfig = PlanConfig(),
                          checkpoints=()):
    """RRT* from start to goal; returns (Path, [(iteration, best_cost)]).

    Deterministic given cfg.seed. best_cost entries are math.inf until the
    first goal connection and never increase afterwards.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    obs = obstacle_arrays(world)

    if not world.contains(start) or not world.contains(goal):
        raise NoPath("start or goal outside world bounds")
    if not point_clear(start, obs) or not point_clear(goal, obs):
        raise NoPath("start or goal inside an obstacle")

    if np.linalg.norm(goal - start) < 1e-12:
        return Path(start[None, :].copy(), 0.0), [(c, 0.0) for c in checkpoints]

    rng = np.random.default_rng(cfg.seed)
    n_max = cfg.iterations + 1
    pos = np.empty((n_max, 3))
    parent = np.full(n_max, -1, dtype=np.int64)
    cost = np.full(n_max, np.inf)
    pos[0] = start
    cost[0] = 0.0
    n = 1

    best_goal_parent = -1
    best_cost = math.inf
    checkpoint_iter = sorted(checkpoints)
    recorded = []
    lo = np.array([world.x_min, world.y_min, 0.0])
    hi = np.array([world.x_max, world.y_max, world.z_max])

    for it in range(1, cfg.iterations + 1):
        if rng.random() < cfg.goal_bias:
            sample = goal
        else:
            sample = lo + rng.random(3) * (hi - lo)

        d2 = np.sum((pos[:n] - sample) ** 2, axis=1)
        nearest = int(np.argmin(d2))
        delta = sample - pos[nearest]
        dist = float(np.linalg.norm(delta))
        if dist < 1e-12:
            new = sample.copy()
        elif dist > cfg.step:
            new = pos[nearest] + delta * (cfg.step / dist)
        else:
            new = sample.copy()

        if not segment_clear(pos[nearest], new, obs):
            _record_checkpoints(recorded, checkpoint_iter, it, best_cost)
            continue

        # choose the cheapest collision-free parent in the rewire ball
        radius = min(max(cfg.gamma * (math.log(n + 1) / (n + 1)) ** (1.0 / 3.0), cfg.step), 4 * cfg.step)
        dn = np.linalg.norm(pos[:n] - new, axis=1)
        near = np.nonzero(dn <= radius)[0]
        best_parent = nearest
        best_c = cost[nearest] + float(np.linalg.norm(new - pos[nearest]))
        for idx in near:
            c = cost[idx] + dn[idx]
            if c < best_c and segment_clear(pos[idx], new, obs):
                best_parent = int(idx)
                best_c = c

        node = n
        pos[node] = new
        parent[node] = best_parent
        cost[node] = best_c
        n += 1

        # rewire neighbours through the new node when that is cheaper
        for idx in near:
            c = best_c + dn[idx]
            if c < cost[idx] and segment_clear(new, pos[idx], obs):
                parent[idx] = node
                cost[idx] = c

        goal_dist = float(np.linalg.norm(goal - new))
        if goal_dist <= cfg.goal_tolerance and segment_clear(new, goal, obs):
            total = best_c + goal_dist
            if total < best_cost:
                best_cost = total
                best_goal_parent = node

        _record_checkpoints(recorded, checkpoint_iter, it, best_cost)

    while len(recorded) < len(checkpoint_iter):
        recorded.append((checkpoint_iter[len(recorded)], best_cost))

    if best_goal_parent < 0:
        raise NoPath(f"no path after {cfg.iterations} iterations")

    chain = [goal]
    idx = best_goal_parent
    while idx >= 0:
        chain.append(pos[idx].copy())
        idx = int(parent[idx])
    chain.reverse()

    wp = shortcut(chain, obs, rng, cfg.shortcut_rounds)
    return Path.from_waypoints(wp), recorded


def _record_checkpoints(recorded, checkpoint_iter, it, best_cost):
    while len(recorded) < len(checkpoint_iter) and checkpoint_iter[len(recorded)] <= it:
        recorded.append((checkpoint_iter[len(recorded)], best_cost))


def plan_path(start, goal, world: WorldModel, cfg: PlanConfig = PlanConfig()) -> Path:
    path, _ = plan_path_checkpoints(start, goal, world, cfg)
    return path
