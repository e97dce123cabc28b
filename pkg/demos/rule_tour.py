"""One step of every transition family, side by side with its analysis."""

from bioamb import analyze, corpus, pretty, step

for name in corpus.names():
    if name == "cell_mol":
        continue
    p = corpus.load(name)
    print(f"== {name}")
    print("   ", pretty(p))
    for redex, q in sorted(step(p), key=lambda rq: pretty(rq[1])):
        fams = "+".join(sorted(redex.families))
        print(f"    --{fams}--> {pretty(q)}")
    r = analyze(p)
    pairs = sorted((a, b) for a, b in r.pairs() if a != r.top)
    print("    predicted nesting:", pairs or "none")
