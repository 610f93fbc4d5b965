#!/usr/bin/env python3
"""Smoke test for the torus_gathering_py extension module.

Builds the cdylib with cargo if needed, loads it, and exercises the
classification, protocol, simulation, and exhaustive-check surfaces.

Usage: python3 python/smoke_test.py
"""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libtorus_gathering_py.so",
        ROOT / "target" / "debug" / "libtorus_gathering_py.so",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        subprocess.run(
            ["cargo", "build", "-p", "torus-gathering-py", "--release"],
            cwd=ROOT,
            check=True,
        )
        lib = candidates[0]
    stage = Path(tempfile.mkdtemp(prefix="tgather-py-"))
    shutil.copy(lib, stage / "torus_gathering_py.so")
    sys.path.insert(0, str(stage))
    import torus_gathering_py

    return torus_gathering_py


def main():
    tg = load_module()

    t = tg.Torus(6, 5)
    assert t.ell == 6 and t.rings == 5 and t.nodes() == 30

    # A full ring plus a block of three on its neighbor: phase-2 shape.
    positions = [(0, 0), (0, 1), (0, 3), (1, 2)]
    assert t.is_rigid(positions)
    label = t.classify(positions)
    assert label == "ls", label

    moves = t.enabled_moves(positions)
    assert moves, "a rigid non-gathered configuration must enable a move"
    for (frm, dests) in moves:
        assert frm in positions
        assert dests
        got = t.decide(positions, frm)
        assert got == dests, (frm, got, dests)

    # A robot that is not scheduled to move stays put.
    movers = {frm for frm, _ in moves}
    for at in positions:
        if at not in movers:
            assert t.decide(positions, at) is None

    # Deterministic seeded runs gather and agree with each other.
    sim = tg.Simulation(t, positions)
    outcome, steps, node = sim.run(max_steps=10_000, seed=42)
    assert outcome == "gathered", (outcome, steps)
    sim2 = tg.Simulation(t, positions)
    outcome2, steps2, node2 = sim2.run(max_steps=10_000, seed=42)
    assert (outcome, steps, node) == (outcome2, steps2, node2)
    assert sim.gathered()
    ((where, count),) = sim.occupancy()
    assert where == node and count == len(positions)

    # Every fair schedule from a small start gathers.
    outcome, visited, depth = tg.check_all_schedules(
        t, [(0, 0), (0, 1), (0, 2)], depth=150, fairness=2
    )
    assert outcome == "all-gathered", outcome
    assert visited > 0 and depth > 0

    # Dimension validation surfaces as ValueError.
    try:
        tg.Torus(5, 6)
    except ValueError:
        pass
    else:
        raise AssertionError("L >= ell must be rejected")

    print("smoke test: ok")


if __name__ == "__main__":
    main()
