#!/usr/bin/env python3
"""Regenerates the committed scenario fixtures.

Swap scenarios place robots on a jittered circle and send each one to the
start of its antipodal partner; the jitter keeps the configurations in
generic position (exact mirror symmetries stall any deterministic
reciprocal-avoidance scheme)."""

import json
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))


def swap_ring(n, radius, angle_jitter, radius_jitter, speeds):
    """Antipodal position swap in the x-y plane; each robot keeps its own
    altitude."""
    half = n // 2
    robots = []
    starts = []
    for i in range(n):
        ang = 2 * math.pi * i / n + math.radians(angle_jitter[i % len(angle_jitter)])
        r = radius + radius_jitter[i % len(radius_jitter)]
        # mod-5 altitude ladder: head-on partners (i, i+n/2) and robots with
        # adjacent goals (i, i+1) always differ by at least 0.4 m, which
        # exceeds the 0.3 m shape height, so conflicts resolve vertically
        z = 0.9 + 0.4 * (i % 5)
        starts.append([round(r * math.cos(ang), 4), round(r * math.sin(ang), 4), round(z, 4)])
    for i in range(n):
        partner = starts[(i + half) % n]
        goal = [partner[0], partner[1], starts[i][2]]
        robots.append({"start": starts[i], "goal": goal,
                       "speed": speeds[i % len(speeds)]})
    return robots


def stagger_departures(robots, waves, wave_gap):
    """Holds each robot at its start for (i mod waves) * wave_gap seconds so
    the crossing region fills in waves instead of all at once."""
    for i, robot in enumerate(robots):
        delay = (i % waves) * wave_gap
        if delay <= 0.0:
            continue
        start, goal, speed = robot.pop("start"), robot.pop("goal"), robot.pop("speed")
        dist = math.dist(start, goal)
        robot["start"] = start
        robot["desired"] = {
            "times": [0.0, delay, delay + dist / speed],
            "points": [start, start, goal],
        }
    return robots


DEFAULTS = {
    "shape": {"box": 0.15},
    "continuity": 2,
    "derivative_limits": [2.0, 10.0],
    "replan_period": 0.1,
    "horizon": 2.5,
    "piece_count": 4,
    "degrees": 6,
    "energy_weights": [0.01, 1.0],
    "deviation_weights": [1.0, 1.0, 1.0, 100.0],
    "rescale_factor": 1.5,
    "max_rescale_attempts": 5,
}

ANGLE_JITTER = [4.0, -7.0, 2.5, -5.0, 6.0, -3.0, 5.5, -2.0, 3.0, -6.5, 1.5, -4.5]
RADIUS_JITTER = [0.0, 0.2, -0.15, 0.1, -0.2, 0.15, 0.05, -0.1]
SPEEDS = [0.8, 0.7, 0.9, 0.75, 0.85, 0.95]


def write(name, doc):
    with open(os.path.join(HERE, name), "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def grid3d(half, zmax, cell):
    return {
        "origin": [-half, -half, 0.0],
        "cell_size": cell,
        "dims": [int(2 * half / cell), int(2 * half / cell), int(zmax / cell)],
    }


write("swap6.json", {
    "name": "swap6",
    "grid": grid3d(8.0, 4.0, 0.5),
    "duration_cap": 60.0,
    "strategy": "HARD_SOFT",
    "defaults": DEFAULTS,
    "robots": swap_ring(6, 5.0, ANGLE_JITTER, RADIUS_JITTER, SPEEDS),
})

write("forest6.json", {
    "name": "forest6",
    "grid": dict(grid3d(8.0, 4.0, 0.5), forest={
        "seed": 7,
        "count": 110,
        "region": [[-4.5, -4.5, 0.5], [4.5, 4.5, 3.5]],
        "clearance": 1.0,
        "snap": True,
    }),
    "duration_cap": 90.0,
    "strategy": "HARD_SOFT",
    "defaults": DEFAULTS,
    "robots": swap_ring(6, 5.5, ANGLE_JITTER, RADIUS_JITTER, SPEEDS),
})

write("swap12.json", {
    "name": "swap12",
    "grid": grid3d(10.0, 4.0, 0.5),
    "duration_cap": 90.0,
    "strategy": "HARD_SOFT",
    "defaults": DEFAULTS,
    "robots": swap_ring(12, 6.0, ANGLE_JITTER, RADIUS_JITTER, SPEEDS),
})

write("swap24.json", {
    "name": "swap24",
    "grid": grid3d(10.0, 4.0, 0.5),
    "duration_cap": 120.0,
    "strategy": "HARD_SOFT",
    "defaults": DEFAULTS,
    "robots": stagger_departures(swap_ring(24, 7.0, ANGLE_JITTER, RADIUS_JITTER, SPEEDS), 4, 7.0),
})

write("headon2.json", {
    "name": "headon2",
    "grid": {"origin": [-6.0, -2.0], "cell_size": 0.5, "dims": [24, 8]},
    "duration_cap": 20.0,
    "strategy": "HARD_SOFT",
    "defaults": DEFAULTS,
    "robots": [
        {"start": [-4.0, 0.0], "goal": [4.0, 0.0], "speed": 0.8},
        {"start": [4.0, 0.0], "goal": [-4.0, 0.0], "speed": 0.8},
    ],
})

write("forest_small.json", {
    "name": "forest_small",
    "grid": {
        "origin": [-6.0, -6.0],
        "cell_size": 0.5,
        "dims": [24, 24],
        "forest": {
            "seed": 12,
            "count": 25,
            "region": [[-4.0, -4.0], [4.0, 4.0]],
            "clearance": 0.9,
            "snap": True,
        },
    },
    "duration_cap": 60.0,
    "strategy": "HARD_SOFT",
    "defaults": DEFAULTS,
    "robots": [
        {"start": [-5.0, 0.2], "goal": [5.0, -0.3], "speed": 0.8},
        {"start": [5.0, -0.2], "goal": [-5.0, 0.4], "speed": 0.8},
        {"start": [0.3, -5.0], "goal": [-0.4, 5.0], "speed": 0.8},
    ],
})

print("scenario fixtures written to", HERE)
