#!/usr/bin/env python3
"""Regenerates the bundled trajectory files (data/*_traj.txt).

Waypoints are resampled at a fixed arc-length step; the heading follows the
direction of travel. Output is committed so runs are reproducible without
Python.
"""
import math
import os

STEP = 0.18

ENV_A = [
    (2.0, 6.8), (0.8, 5.5), (0.8, 0.8), (2.0, 0.7), (3.3, 1.5), (3.3, 3.8),
    (5.0, 3.8), (6.0, 2.0), (8.8, 1.0), (9.0, 3.8), (7.0, 4.2), (7.0, 6.0),
    (8.8, 6.5), (8.8, 7.3), (5.2, 7.2), (4.8, 5.8),
]

ENV_B = [
    (1.0, 0.9), (4.5, 0.7), (8.1, 0.8), (8.3, 3.5), (8.2, 6.1), (4.8, 6.4),
    (1.0, 6.1), (0.9, 3.5), (1.0, 0.9), (4.4, 1.0), (4.3, 3.4), (4.5, 6.2),
]


def resample(waypoints, step):
    poses = []
    for (x0, y0), (x1, y1) in zip(waypoints, waypoints[1:]):
        seg = math.hypot(x1 - x0, y1 - y0)
        heading = math.atan2(y1 - y0, x1 - x0)
        n = max(1, int(seg / step))
        for k in range(n):
            t = k / n
            poses.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0), heading))
    x1, y1 = waypoints[-1]
    poses.append((x1, y1, poses[-1][2]))
    return poses


def circle(cx, cy, radius, n):
    poses = []
    for k in range(n):
        a = 2.0 * math.pi * k / n
        poses.append((cx + radius * math.cos(a), cy + radius * math.sin(a),
                      a + math.pi / 2.0))
    return poses


def write(path, poses):
    with open(path, "w") as f:
        f.write("# x y theta\n")
        for x, y, theta in poses:
            f.write(f"{x:.17g} {y:.17g} {theta:.17g}\n")
    print(f"{path}: {len(poses)} poses")


def main():
    data = os.path.join(os.path.dirname(__file__), "..", "data")
    write(os.path.join(data, "env_a_traj.txt"), resample(ENV_A, STEP))
    write(os.path.join(data, "env_b_traj.txt"), resample(ENV_B, STEP))
    write(os.path.join(data, "unit_box_traj.txt"), circle(1.5, 1.5, 0.6, 12))


if __name__ == "__main__":
    main()
