"""
The catalog and random scans
============================

Every catalog entry carries its expected behaviour. A scan draws points
from the entry's sampling box and runs the full analysis at each.
"""

from mafoliation.analysis import scan
from mafoliation.catalog import CATALOG, run_expectations

for name, entry in CATALOG.items():
    rep = run_expectations(name, seed=7, samples=10)
    print(f"{name:20s} {entry.leaf_type:10s} passed {rep.passed}/{rep.accepted}")

summary = scan(CATALOG["halfplane"].spec, samples=20, seed=1)
agg = summary.to_dict()["aggregate"]
print("largest S reference error:", agg["max_reference_S"])
print("smallest curvature gap:", agg["min_gap"])
