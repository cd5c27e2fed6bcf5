"""Generate the bundled curve fixture (conductor <= MAX) from PARI's elldata."""
import json, sys, cypari2
pari = cypari2.Pari()
pari.default("datadir", sys.argv[3] if len(sys.argv) > 3 else "/usr/share/pari")
pari.allocatemem(2 * 10**9)
MAX = int(sys.argv[1]) if len(sys.argv) > 1 else 600
PRIMES = [int(p) for p in pari.primes(60)]
def kodaira(k):
    k = int(k)
    if k == 1: return "I0"
    if k == 2: return "II"
    if k == 3: return "III"
    if k == 4: return "IV"
    if k == -1: return "I0*"
    if k == -2: return "II*"
    if k == -3: return "III*"
    if k == -4: return "IV*"
    if k > 4: return f"I{k-4}"
    if k < -4: return f"I{-k-4}*"
    raise ValueError(k)
def letters(i):
    # base 26 with a = 0: a..z, ba, bb, ...
    s = ""
    while True:
        i, r = divmod(i, 26)
        s = chr(97 + r) + s
        if i == 0:
            return s

out = []
for N in range(1, MAX + 1):
    recs = pari(f"ellsearch({N})")
    classes = {}
    for rec in recs:
        lab = str(rec[0])
        cls = lab.rstrip("0123456789")
        classes.setdefault(cls, []).append((lab, [int(x) for x in rec[1]]))
    keyed = []
    for cls, cs in classes.items():
        E = pari.ellinit(cs[0][1])
        aps = tuple(int(pari.ellap(E, p)) for p in PRIMES)
        keyed.append((aps, cls, cs))
    keyed.sort()
    for ci, (aps, cls, cs) in enumerate(keyed):
        cs_sorted = sorted(cs, key=lambda t: t[1])
        for idx, (clab, ainv) in enumerate(cs_sorted):
            E = pari.ellinit(ainv)
            gr = pari.ellglobalred(E)
            assert int(gr[0]) == N
            fac = pari.factor(N)
            kod = {}
            for p in fac[0]:
                lr = pari.elllocalred(E, p)
                kod[str(int(p))] = kodaira(lr[1])
            tors = pari.elltors(E)
            optimal = clab[len(cls):] == "1"
            if clab == "990h1": optimal = False
            if clab == "990h3": optimal = True
            out.append({
                "label": f"{N}.{letters(ci)}{idx+1}",
                "cremona_label": clab,
                "conductor": N,
                "ainvs": ainv,
                "optimal": optimal,
                "modular_degree": int(pari.ellmoddegree(E)) if optimal else None,
                "torsion_order": int(tors[0]),
                "torsion_structure": [int(x) for x in tors[1]],
                "class_size": len(cs),
                "kodaira": kod,
            })
with open(sys.argv[2] if len(sys.argv) > 2 else "/tmp/curves.jsonl", "w") as f:
    for e in out:
        f.write(json.dumps(e, separators=(",", ":")) + "\n")
print(len(out), file=sys.stderr)
