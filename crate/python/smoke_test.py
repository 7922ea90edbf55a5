"""Smoke test for the Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/python
then run:
    python python/smoke_test.py
"""

import json

import ambuplan_py as ap

TINY1 = {
    "schema_version": 1,
    "stations": 2,
    "zones": 2,
    "slots": 1,
    "fleet": 3,
    "coverage": [[1, 0], [1, 1]],
    "capacity": [[2], [2]],
    "hold_cost": [[1], [1]],
    "dispatch_cost": [[1], [2]],
    "demand": [[1], [1]],
    "big_m": 1000,
    "transfer_cost": 0,
}


def main():
    inst = ap.Instance.from_json(json.dumps(TINY1))
    assert inst.validate() == []
    assert ap.Instance.from_json(inst.to_json()) == inst

    for model in (1, 2):
        res = ap.solve(inst, model)
        assert res.status == "optimal", res
        assert res.objective == 5, res
        assert res.slot_shortage == [0]
        assert ap.brute_force(inst, model).objective == 5
        objective, violations = ap.evaluate(inst, res.plan_json)
        assert (objective, violations) == (5, [])

    res = ap.solve(inst, 2)
    assert ap.report(inst, res.plan_json, "csv") == "Slot,Z1,Z2,Shortage\r\n1,1/1,1/1,0\r\n"

    big = ap.generate(42, preset=1)
    assert (big.num_stations, big.num_zones, big.num_slots, big.fleet_size) == (10, 20, 4, 100)
    res = ap.solve(big, 2)
    rows = ap.report(big, res.plan_json, "csv").strip().split("\r\n")
    assert len(rows) == 1 + 4 and len(rows[0].split(",")) == 22

    tiny = ap.tiny_instance(1, 3)
    for model in (1, 2):
        assert ap.solve(tiny, model).objective == ap.brute_force(tiny, model).objective

    try:
        ap.solve(inst, 3)
    except ValueError:
        pass
    else:
        raise AssertionError("model 3 must be rejected")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
