#!/usr/bin/env python3
"""Exploration: can a second transversal-style subset be removed from the
desarguesian spread and replaced, on top of the construction behind the
q^(2m) - q^m + gcd(2,q-1) family?

This probes the open question by brute force at tiny parameters: remove the
members met by (E, theta*E) AND by a second coset pair (alpha*E, theta*alpha*E)
for every alpha, replace by both 2m-spaces where legal, and ask the engine
whether the result is still maximal.  Findings are printed, not asserted;
nothing here claims a theorem.

Usage: python scripts/explore_double_removal.py [q] [m]
"""

import sys

from polarspread import families as F
from polarspread import verify as V
from polarspread.families import Provenance, SubspaceFamily
from polarspread.gf import find_theta


def main(q: int, m: int) -> int:
    ts = F._trace_space(q, 2 * m, mid=m)
    tw = ts.tw
    theta = find_theta(tw, ts.kdeg)
    edeg = ts.kdeg * m
    ebasis = tw.subfield_basis(edeg, ts.kdeg)
    spread = F.desarguesian_symplectic_spread(q, 2 * m, mid=m)

    def transversal(alpha):
        abasis = [tw.mul(alpha, b) for b in ebasis]
        return ts.pair_space(abasis, [tw.mul(theta, x) for x in abasis])

    base = transversal(1)
    star1 = {mem for mem in spread.members if base.intersect(mem).dim > 0}
    print(f"q={q} m={m}: base removal drops {len(star1)} members")
    tried = 0
    for alpha in range(2, tw.order):
        if tw.in_subfield(edeg, alpha):
            continue
        z2 = transversal(alpha)
        if not ts.space.is_ti(z2):
            continue
        if z2.intersect(base).dim != 0:
            continue
        star2 = {mem for mem in spread.members if z2.intersect(mem).dim > 0}
        if star2 & star1:
            continue
        members = [mem for mem in spread.members if mem not in star1 | star2]
        members += [base, z2]
        fam = SubspaceFamily(
            ts.space, members, Provenance("explore-double", {"q": q, "m": m, "alpha": alpha})
        )
        if not V.is_partial_spread(fam, "symplectic"):
            continue
        tried += 1
        cert = V.check_maximal_spread(fam, "symplectic")
        print(
            f"  alpha={alpha}: size {len(fam)} -> {cert.verdict}"
            + ("" if cert.is_maximal else " (extendable; not maximal)")
        )
        if tried >= 8:
            break
    if tried == 0:
        print("  no disjoint second transversal pair exists at these parameters")
    return 0


if __name__ == "__main__":
    q = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    m = int(sys.argv[2]) if len(sys.argv) > 2 else 1
    sys.exit(main(q, m))
