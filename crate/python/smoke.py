"""Smoke test for the tagtrack Python module.

Build and install first:
    pip install maturin
    maturin develop -m crates/py/Cargo.toml --release
"""

import json
import math

import tagtrack


def main():
    cfg = json.loads(tagtrack.default_config())
    assert cfg["tag_count"] == 10

    uav = tagtrack.UavState(0.0, 0.0, 30.0, 0.0)
    p = tagtrack.received_power((100.0, 0.0, 1.0), uav)
    assert math.isfinite(p) and -160.0 < p < 0.0, p

    poses = tagtrack.uav_rollout(uav, (200.0, 0.0), 11)
    assert len(poses) == 11
    assert all(0.0 <= q.speed <= 5.0 + 1e-9 for q in poses)

    b = tagtrack.ObjectBelief(1, [(0.0, 0.0, 1.0), (300.0, 0.0, 1.0)], [1.0, 3.0])
    assert abs(b.void_probability(uav, 50.0) - 0.75) < 1e-12
    assert tagtrack.trajectory_void_probability([b], poses, 50.0) == 0.75

    beliefs = [tagtrack.ObjectBelief.uniform(i + 1, 500, seed=3) for i in range(3)]
    d = tagtrack.select_action(beliefs, tagtrack.UavState(500.0, 500.0), planner="lavapilot")
    assert d is not None and d["outcome"] in ("selected", "escape", "fallback"), d
    assert len(d["rollout"]) == cfg["void"]["horizon"]

    small = json.dumps({"tag_count": 2, "max_flight_time": 60, "tracker": {"particle_count": 300}})
    rec = json.loads(tagtrack.run_mission(small))
    assert rec["summary"]["steps"] == len(rec["rows"]) <= 60

    mc = json.loads(tagtrack.run_montecarlo(small, trials=2))
    assert mc["trials"] == 2

    report = json.loads(tagtrack.bench(particles=200, tags=2, reps=10))
    lava = next(r for r in report["rows"] if r["planner"]["strategy"] == "lavapilot")
    assert lava["likelihood_calls"] == 0

    try:
        tagtrack.run_mission(json.dumps({"tag_count": 0}))
    except ValueError:
        pass
    else:
        raise AssertionError("invalid config accepted")

    print("tagtrack smoke test passed")


if __name__ == "__main__":
    main()
