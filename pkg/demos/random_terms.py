"""Randomized check that the analysis survives every reduction step."""

import time
from collections import Counter

from bioamb import pretty
from bioamb.verify import check_theorem, measure_precision, random_corpus

start = time.perf_counter()
terms = random_corpus(200, seed=3, max_ambients=5, max_prefixes=10)
families = Counter()
states = spurious = 0
for p in terms:
    rep = check_theorem(p, 6)
    prec = measure_precision(p, 6)
    assert rep.ok, (pretty(p), rep.violations)
    assert prec.truncated or not prec.missed
    families.update(rep.families)
    states += rep.states_checked
    spurious += len(prec.spurious)

print(f"{len(terms)} terms, {states} states in {time.perf_counter() - start:.1f}s")
print("steps per family:", dict(sorted(families.items())))
print("spurious parent/child pairs overall:", spurious)
print("a sample term:", pretty(terms[0]))
