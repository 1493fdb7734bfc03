"""Smoke test for the wavebreak_py extension.

Build with `pip install --no-build-isolation crates/python`, then run
`python python/smoke_test.py`.
"""

import json
import math
import tempfile

import wavebreak_py as wb


def main():
    d = wb.profile_derivatives_at(0.0)
    assert d[0] == 0.0
    assert abs(d[1] + 1.0) < 1e-12
    assert abs(d[3] - 6.0) < 1e-8

    for y in (-50.0, -0.3, 0.7, 1e3):
        w = wb.profile(y)
        assert abs(w**3 + w + y) <= 1e-12 * max(1.0, abs(y))

    # rescaling with nu = 6 is the identity
    assert abs(wb.rescaled(2.5, 6.0) - wb.profile(2.5)) < 1e-12

    # exact transport solution satisfies w = w0(x - t w)
    x, t = 1.0, 5.0
    w = wb.burgers_sine(x, t, kappa=3.0, amplitude=0.1)
    assert abs(w - (3.0 - 0.1 * math.sin(x - t * w))) < 1e-12

    report = json.loads(wb.profile_check(500, 1e6))
    assert report["pass"], report

    with tempfile.TemporaryDirectory() as out:
        verdict = json.loads(
            wb.simulate("burgers-oracle", out, ["grid.nodes=2048"])
        )
        assert "items" in verdict
        blowup = next(i for i in verdict["items"] if i["id"] == "I")
        assert blowup["pass"], blowup

    print("smoke test passed")


if __name__ == "__main__":
    main()
