"""Smoke test for the qpfix extension module.

Build and install first, e.g. `pip install --no-build-isolation ./crates/python`
or `maturin develop -m crates/python/Cargo.toml`.
"""

import csv
import io
import json

import qpfix


def main():
    unit = qpfix.Space.catalog("upper_interval", json.dumps({"lo": 0, "hi": 1}))
    assert unit.dist(0.75, 0.25) == 0.5
    assert unit.dist(0.25, 0.75) == 0.0
    assert json.loads(unit.check_axioms())["triangle_violations"] == []

    ctx = qpfix.Context(unit)
    assert ctx.induced_leq(0.25, 0.75)
    assert not ctx.induced_leq(0.75, 0.25)

    maps = json.dumps([{"id": "coupled_max"}, {"id": "affine_pull", "params": {"a": 0.5, "b": 0.5}}])
    report, trace = ctx.solve(maps, (0.0, 0.0), json.dumps({"verify_hypotheses": True}))
    report = json.loads(report)
    assert report["status"] == "converged", report
    x, y = report["candidate"]
    assert abs(1 - x) <= 1e-9 and abs(1 - y) <= 1e-9
    rows = list(csv.DictReader(io.StringIO(trace)))
    assert rows[0]["scheme_phase"] == "seed" and rows[1]["scheme_phase"] == "F"

    verdict = json.loads(ctx.verify_point(maps, x, y))
    assert {"label": "E3", "map": 0} in verdict["labels"]

    bad = json.dumps([{"id": "coupled_max"}, {"id": "affine_pull", "params": {"a": 0.5, "b": 0}}])
    gated = json.loads(ctx.solve(bad, (0.5, 0.5), json.dumps({"verify_hypotheses": True}))[0])
    assert gated["status"] == "hypothesis_violated"
    assert gated["violation"]["condition"] == "C1"

    two = qpfix.Space.finite([[0, 1], [1, 0]])
    sets = json.loads(qpfix.enumerate(two, json.dumps([{"id": "coupled_table", "params": {"table": [[1, 1], [1, 1]]}}])))
    assert sets["E1"] == [[1, 1]]

    camp = json.loads(qpfix.campaign(42, json.dumps({"instances": 20}), json.dumps({"verify_hypotheses": True})))
    assert camp["disagreements"] == 0

    try:
        qpfix.Space.catalog("klein_bottle")
    except KeyError:
        pass
    else:
        raise AssertionError("unknown catalog id accepted")

    print("qpfix smoke test passed")


if __name__ == "__main__":
    main()
