"""Smoke test for the metreal_py extension.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`,
or put a copy of the built shared library named metreal_py.so on PYTHONPATH.
"""

import json
from fractions import Fraction

import metreal_py as mr

SIX = [
    [0, 2, 5, 6, 7, 4],
    [2, 0, 5, 6, 7, 4],
    [5, 5, 0, 4, 5, 3],
    [6, 6, 4, 0, 3, 2],
    [7, 7, 5, 3, 0, 3],
    [4, 4, 3, 2, 3, 0],
]

HEXAGON = [
    [0, 3, 4, 1, 3, 2],
    [3, 0, 2, 4, 3, 1],
    [4, 2, 0, 3, 1, 3],
    [1, 4, 3, 0, 2, 3],
    [3, 3, 1, 2, 0, 4],
    [2, 1, 3, 3, 4, 0],
]


def main():
    d = mr.DistanceMatrix(SIX)
    assert d.order == 6 and d.labels == [1, 2, 3, 4, 5, 6]
    assert mr.DistanceMatrix.from_csv(d.to_csv()) == d
    assert mr.DistanceMatrix.from_json(d.to_json()) == d

    a = d.compaction_vector()
    assert a == {1: 1, 2: 1, 3: Fraction(3, 2), 4: 1, 5: 2, 6: 0}, a

    r = mr.realize(d)
    assert r.status == "genus1" and r.verified
    assert r.total_weight == 12
    assert r.cycle == [6, 11, 9, 13]
    assert len(r.edges()) == 11
    doc = json.loads(r.to_json(trace=True))
    assert doc["trace"]["trace_version"] == 1
    assert doc["trace"]["iterations"][0]["a"] == ["1", "1", "3/2", "1", "2", "0"]
    assert r.to_dot().startswith("graph")

    halves = mr.DistanceMatrix([[0, "3/2"], [Fraction(3, 2), 0]], labels=[4, 9])
    assert halves.get(4, 9) == Fraction(3, 2)
    assert mr.realize(halves).status == "tree"

    h = mr.DistanceMatrix(HEXAGON)
    ok = mr.check_cycle(h, [1, 4, 5, 3, 2, 6])
    assert ok["valid"] and ok["total_weight"] == 9 and ok["optimal"]
    bad = mr.check_cycle(h, [1, 2, 3, 4, 5, 6])
    assert not bad["valid"] and bad["violations"]
    assert mr.check_cycle(h)["order"] == [1, 4, 5, 3, 2, 6]
    assert mr.tropical_zero(h, [1, 4, 5, 3, 2, 6])
    assert not mr.tropical_zero(h, [1, 2, 3, 4, 5, 6])
    rows = mr.tropical_sweep(h, [1, 4, 5, 3, 2, 6])
    assert all(mult >= 2 for _, _, _, mult in rows)

    graph, m = mr.generate("genus1", 8, seed=3, cycle_len=6)
    assert json.loads(graph)["edges"]
    assert mr.realize(m).status == "genus1"

    try:
        mr.DistanceMatrix([[0, 1, 2], [2, 0, 1], [2, 1, 0]])
    except mr.MetrealError as e:
        assert "Asymmetric(1,2)" in str(e), e
    else:
        raise AssertionError("asymmetric matrix accepted")

    try:
        mr.DistanceMatrix([[0, 1.5], [1.5, 0]])
    except TypeError:
        pass
    else:
        raise AssertionError("float entry accepted")

    print("metreal_py smoke test passed")


if __name__ == "__main__":
    main()
