"""A molecule that shuttles in and out of a cell.

Run with ``python demos/cell_and_molecule.py``.
"""

from bioamb import analyze, corpus, explore, pretty
from bioamb.verify import check_theorem, measure_precision

p = corpus.load("cell_mol")
print(pretty(p))

# Reachable states. The molecule enters the cell, can leave again, and can
# be told (over channel c) which capability to use to push D out of itself.
space = explore(p, max_depth=10)
print(space.summary())
for src, redex, dst in space.edges:
    print(f"  {src} -> {dst}  {redex.rule}  at {'/'.join(redex.locus) or 'top'}")

# The static analysis: what each ambient may ever contain.
result = analyze(p)
for mu in [result.top] + result.ambients:
    print(f"{mu:>5} may contain {sorted(result.children(mu))}")

# cell shows up as nobody's child except the top level, so it never moves
# into mol or D, whatever the schedule.
assert "cell" not in result.children("mol") and "cell" not in result.children("D")

x = next(n for n in result.bindings if n.label == "x")
print("x may be bound to", sorted(map(str, result.values(x))))

# Re-check the result on every reachable state and compare it with what
# the explorer actually saw.
report = check_theorem(p, 10, result=result, space=space)
prec = measure_precision(p, 10, result=result, space=space)
print(f"violations: {len(report.violations)}, spurious pairs: {sorted(prec.spurious)}")
