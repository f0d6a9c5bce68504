#!/usr/bin/env python3
"""Writes the five collision-scenario archetypes and a minimal empty road."""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "scenarios"

LANE = {"id": 1, "centerline": [[0.0, 0.0], [250.0, 0.0]], "width": 3.5, "speed_limit": 11.0, "successors": []}


def base(name, seed, objects):
    return {
        "name": name,
        "map": {"lanes": [LANE]},
        "ego": {"init_pose": {"p": [10.0, 0.0], "heading": 0.0}, "dest": [210.0, 0.0], "size": [4.0, 2.0, 1.5]},
        "objects": objects,
        "signals": [],
        "t_max_ms": 60000,
        "seed": seed,
    }


def wp(t, p, v=(0.0, 0.0)):
    return {"t_ms": t, "p": list(p), "v": list(v), "a": [0.0, 0.0]}


def parked(oid, kind, size, p, heading=0.0):
    return {"id": oid, "kind": kind, "size": size, "waypoints": [wp(0, p)], "heading_override": heading}


def cs1():
    # Pedestrian waits at the curb, then crosses from right to left.
    x, y0, y1, speed, t0 = 90.0, -5.0, 5.0, 1.5, 8000
    t1 = t0 + round((y1 - y0) / speed * 1000)
    ped = {
        "id": 1,
        "kind": "Pedestrian",
        "size": [0.6, 0.6, 1.8],
        "waypoints": [
            wp(0, (x, y0)),
            wp(t0 - 1, (x, y0)),
            wp(t0, (x, y0), (0.0, speed)),
            wp(t1, (x, y1), (0.0, speed)),
            wp(t1 + 1, (x, y1)),
        ],
        "heading_override": 1.5707963267948966,
    }
    return base("cs1_pedestrian", 101, [ped])


def cs2():
    lead = {
        "id": 1,
        "kind": "Vehicle",
        "size": [4.5, 1.8, 1.5],
        "waypoints": [wp(0, (45.0, 0.0), (5.0, 0.0)), wp(60000, (345.0, 0.0), (5.0, 0.0))],
    }
    return base("cs2_lead_vehicle", 102, [lead])


def cs3():
    return base("cs3_static_object", 103, [parked(1, "StaticObstacle", [0.5, 0.5, 0.8], (100.0, -1.35))])


def cs4():
    return base("cs4_parked_vehicle", 104, [parked(1, "Vehicle", [4.5, 1.8, 1.5], (130.0, -2.0))])


def cs5():
    divider = [parked(i + 1, "Infrastructure", [10.0, 0.5, 1.0], (20.0 + 10.0 * i, 2.25)) for i in range(21)]
    return base("cs5_divider", 105, divider)


def minimal():
    s = base("empty_road", 1, [])
    s["ego"]["dest"] = [110.0, 0.0]
    s["t_max_ms"] = 30000
    return s


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for fn, name in [(cs1, "cs1"), (cs2, "cs2"), (cs3, "cs3"), (cs4, "cs4"), (cs5, "cs5"), (minimal, "minimal")]:
        (OUT / f"{name}.json").write_text(json.dumps(fn(), indent=2) + "\n")


if __name__ == "__main__":
    main()
