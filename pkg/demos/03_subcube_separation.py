"""Separating vertices into disjoint subcubes
=============================================

Any k <= d distinct vertices of Q^d can be placed in pairwise disjoint
axis-aligned subcubes, each of dimension at least d-k+1, each holding
exactly one of the chosen vertices. The construction recursively splits
the current subcube on a coordinate where two not-yet-separated
vertices differ, so it uses at most k-1 coordinate pins in total.

A second construction: given a vertex v inside a host subcube, build m
pairwise disjoint subcubes of the host, each containing a neighbor of v
but not v itself. These give the contact points for routing many
disjoint connections toward v.
"""

from cubeperc import Hypercube, Subcube, build_pivot_subcubes, separate_into_subcubes

d = 10
q = Hypercube(d)
S = [0b0000000000, 0b0000000011, 0b1111000000, 0b1010101010]

print(f"separating {len(S)} vertices in Q^{d}:")
pairs = separate_into_subcubes(q, S)
for sub, v in pairs:
    print(f"  {v:>4} ({v:0{d}b}) -> {sub!r}  dim={sub.dimension()}")

dims = [sub.dimension() for sub, _ in pairs]
print(f"guaranteed dimension: d-k+1 = {d - len(S) + 1}; achieved: {min(dims)}")
all_disjoint = all(
    a.disjoint_from(b)
    for i, (a, _) in enumerate(pairs)
    for b, _ in (p for j, p in enumerate(pairs) if j > i)
)
print(f"pairwise disjoint: {all_disjoint}\n")

# pivot subcubes inside a host
host = Subcube.whole(d)
v = 0b1010101010
m = 4
print(f"{m} pivot subcubes around {v:0{d}b} inside the full cube:")
for sub, w in build_pivot_subcubes(q, host, v, m):
    print(f"  neighbor {w:0{d}b} -> {sub!r}  dim={sub.dimension()}")

print("""
Each pivot subcube contains its paired neighbor of v, excludes v, and
is disjoint from the others; its dimension is the host's minus m. Both
constructions are pure label arithmetic: nothing is enumerated, so the
same code runs unchanged at d=32 and beyond.
""")

big = Hypercube(32)
big_pairs = separate_into_subcubes(big, [0, 2**31, 2**16 + 5, (1 << 32) - 1])
print("d=32 separation dimensions:", [s.dimension() for s, _ in big_pairs])
