"""End-to-end smoke test for the Python bindings.

Run after `pip install -e . --no-build-isolation` (or after
`python setup.py build_ext --inplace`, which drops the extension next
to python/covertime/). Exercises every exposed operation against known
closed-form values and exits nonzero on the first failure.
"""

import math
import sys
from pathlib import Path

try:
    from covertime import Tree
except ImportError:
    sys.path.insert(0, str(Path(__file__).resolve().parent))
    from covertime import Tree


def check(name, cond):
    print(f"{'ok' if cond else 'FAIL'}  {name}")
    if not cond:
        sys.exit(1)


def bracket(report, truth, rel=1e-3):
    lo = float(report["lower"])
    hi = float(report["upper"])
    return lo <= truth <= hi and hi - lo <= rel * max(truth, 1.0)


path3 = Tree("a b\nb c")
check("parse keeps labels in first-seen order", path3.labels() == ["a", "b", "c"])

# Path from an endpoint: cover-and-return is 2(n-1)^2, plain cover half that.
r = path3.estimate("a", epsilon="0.001")
check("cover-return on a 3-path brackets 8", bracket(r, 8.0))
check("rational backend flags its output exact", r["exact"] is True and r["backend"] == "rational")

r = path3.estimate("a", epsilon=1e-3, backend="float")
check("float backend brackets 8 too", bracket(r, 8.0) and r["exact"] is False)

r = path3.estimate("a", epsilon="0.001", mode="cover")
check("plain cover on a 3-path brackets 4", bracket(r, 4.0))

r = path3.estimate("a", trunc_n=368, mode="subset", targets=["a"])
check("covering only the start costs 0", float(r["estimate"]) == 0.0 and float(r["upper"]) == 0.0)

r = path3.estimate("a", epsilon="0.001", mode="subset", targets=["a", "b", "c"])
check("covering every vertex matches cover-return", bracket(r, 8.0))

heavy = Tree("a b 2")
r = heavy.estimate("a", epsilon="0.001", mode="weighted")
check("one edge of resistance 2 walks 2 chain steps", bracket(r, 2.0))
r = heavy.estimate("a", epsilon="0.001", mode="weighted", units="subdivided")
check("the same edge subdivided walks 8 unit steps", bracket(r, 8.0))

# Star from the center: cover-and-return is 2(n-1)H_{n-1}.
star4 = Tree("hub a\nhub b\nhub c")
truth = 2 * 3 * (1 + 1 / 2 + 1 / 3)
r = star4.estimate("hub", epsilon="0.001")
check("4-star from the hub brackets 11", bracket(r, truth))

ex = star4.exact_oracle("hub")
check("exact oracle agrees on the star", math.isclose(ex["cover_return"], truth))
check("last-vertex law is a distribution", math.isclose(sum(ex["p_last"].values()), 1.0))

check("hitting time across a 3-path is 4", path3.hitting("c", "a") == 4.0)

mc = Tree("a b").mc_cover_return("a", samples=500, seed=7)
check("single-edge walk is deterministic", mc["mean"] == 2.0 and mc["std_dev"] == 0.0)

mc = path3.mc_cover_return("a", samples=100_000, seed=0)
check("Monte Carlo mean lands near 8", abs(mc["mean"] - 8.0) <= 4 * mc["half_width_99"] / 2.5758)
again = path3.mc_cover_return("a", samples=100_000, seed=0)
check("Monte Carlo is reproducible for a fixed seed", again == mc)

for bad, kind in [
    (lambda: Tree("a b\nb a"), ValueError),
    (lambda: path3.estimate("z", epsilon="0.001"), ValueError),
    (lambda: path3.estimate("a"), ValueError),
    (lambda: path3.estimate("a", epsilon="0.001", trunc_n=10), ValueError),
]:
    try:
        bad()
    except kind:
        pass
    else:
        check(f"expected {kind.__name__}", False)
print("ok   malformed inputs raise ValueError")

print("all smoke checks passed")
