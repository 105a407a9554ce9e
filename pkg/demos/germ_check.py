"""Walkthrough: the germ checker on a generic map and on a degenerate one.

Run with ``python3 demos/germ_check.py``. The generic (2,2,3) check takes a few minutes;
pass ``--quick`` to run only the cheap probes.
"""

import sys

from singcensus import check_germ
from singcensus.census import CHEAP
from singcensus.polycore import MultiPoly, PolyMap, random_map

conditions = CHEAP if "--quick" in sys.argv else None


def show(title, rep):
    print(f"{title}: {rep.verdict}" + (f" (gate: {rep.gate_reason})" if rep.gate_reason else ""))
    for name, res in rep.conditions.items():
        extra = f", {len(res.witnesses)} witnesses" if res.witnesses else ""
        print(f"   condition {name:14s} {res.status}{extra}")


# %% (x^2, y^2, z^3) is critical along the coordinate axes with corank 2
x, y, z = MultiPoly.variables(3)
rep = check_germ(PolyMap([x**2, y**2, z**3]), conditions=CHEAP)
show("(x^2, y^2, z^3)", rep)
print("   a corank-2 witness:", [complex(round(c.real, 6), round(c.imag, 6)) for c in rep.conditions["5-corank2"].witnesses[0]])

# %% Degrees (3,3,5) never admit a finitely determined homogeneous germ; no solving happens
show("random (3,3,5)", check_germ(random_map((3, 3, 5), homogeneous=True, seed=0)))

# %% A random homogeneous (2,2,3) map
kw = {"conditions": conditions} if conditions else {}
show("random (2,2,3)", check_germ(random_map((2, 2, 3), homogeneous=True, seed=1), **kw))
