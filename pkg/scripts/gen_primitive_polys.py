#!/usr/bin/env python3
"""Regenerate the primitive-polynomial table baked into polarspread.gf.

Rule: for each (p, d), the lexicographically smallest monic polynomial of
degree d over GF(p) (low coefficients read as base-p digits) whose root x is
a generator of the multiplicative group.  Prints the table body.
"""

import sys


def factorize(n):
    f = {}
    i = 2
    while i * i <= n:
        while n % i == 0:
            f[i] = f.get(i, 0) + 1
            n //= i
        i += 1
    if n > 1:
        f[n] = f.get(n, 0) + 1
    return sorted(f)


def digits(n, p, d):
    out = []
    for _ in range(d):
        out.append(n % p)
        n //= p
    return out


def undigits(c, p):
    out = 0
    for v in reversed(c):
        out = out * p + v
    return out


def find(p, d):
    order = p**d - 1
    primes = factorize(order)
    if d == 1:
        for c0 in range(1, p):
            g = (-c0) % p
            if g and all(pow(g, order // r, p) != 1 for r in primes):
                return (c0,)
        raise RuntimeError("no primitive root (impossible)")
    for n in range(p**d):
        coeffs = digits(n, p, d)
        if coeffs[0] == 0:
            continue
        red = [(-c) % p for c in coeffs]

        def mul(a, b):
            da, db = digits(a, p, d), digits(b, p, d)
            prod = [0] * (2 * d)
            for i, ai in enumerate(da):
                if ai:
                    for j, bj in enumerate(db):
                        prod[i + j] = (prod[i + j] + ai * bj) % p
            for k in range(2 * d - 1, d - 1, -1):
                v = prod[k]
                if v:
                    prod[k] = 0
                    for t in range(d):
                        prod[k - d + t] = (prod[k - d + t] + v * red[t]) % p
            return undigits(prod[:d], p)

        def powx(e):
            acc, base = 1, p
            while e:
                if e & 1:
                    acc = mul(acc, base)
                e >>= 1
                base = mul(base, base)
            return acc

        if powx(order) != 1:
            continue
        if all(powx(order // r) != 1 for r in primes):
            return tuple(coeffs)
    raise RuntimeError(f"no primitive polynomial for GF({p}^{d})")


def main():
    need = (
        [(2, d) for d in range(1, 17)]
        + [(3, d) for d in range(1, 7)]
        + [(5, d) for d in range(1, 5)]
        + [(7, d) for d in range(1, 4)]
        + [(11, d) for d in range(1, 3)]
    )
    for p, d in need:
        print(f"    ({p}, {d}): {find(p, d)},")


if __name__ == "__main__":
    sys.exit(main())
