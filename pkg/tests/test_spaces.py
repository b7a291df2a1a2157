"""Forms, perps, singular enumeration, type classification, maximal t.s.
enumeration with brute-force cross-checks, projection/lift, descent, Klein."""

import itertools

import numpy as np
import pytest

from polarspread import gf
from polarspread.families import _ovoid_context
from polarspread.gf import FieldView
from polarspread.linalg import all_points, canonicalize
from polarspread.spaces import (
    TsType,
    ZProjection,
    embed,
    field_descend,
    find_isometry,
    klein_point_of_line,
    klein_space,
    make_orthogonal,
    ominus4_space,
    oplus_space,
    parabolic_in_oplus8,
    parabolic_space,
    sp_space,
)
from polarspread.verify import all_subspaces_of_dim


def test_symplectic_form_values():
    s = sp_space(2, 2)
    e1, f1, e2, f2 = np.eye(4, dtype=np.int64)
    assert s.bform(e1, f1) == 1
    assert s.bform(e1, e2) == 0
    for v in all_points(s.fv, 4):
        assert s.bform(v, v) == 0


def test_quadratic_scaling():
    o = oplus_space(3, 2)
    tw = o.fv.tower
    rng = np.random.default_rng(5)
    for _ in range(30):
        v = rng.integers(0, 3, size=4)
        lam = int(rng.integers(1, 3))
        lv = tw.vmul(np.int64(lam), v)
        assert o.qform(lv) == tw.mul(tw.mul(lam, lam), o.qform(v))


def test_perp_examples():
    s = sp_space(2, 2)
    z = canonicalize(s.fv, [], 4)
    assert s.perp(z).dim == 4
    e1 = canonicalize(s.fv, [[1, 0, 0, 0]], 4)
    p = s.perp(e1)
    assert p.dim == 3 and p.contains(np.array([1, 0, 0, 0]))
    o = oplus_space(3, 2)
    rng = np.random.default_rng(7)
    for _ in range(15):
        a = canonicalize(o.fv, rng.integers(0, 3, size=(2, 4)), 4)
        assert o.perp(o.perp(a)) == a


def test_singular_point_counts():
    o22 = oplus_space(2, 1)
    assert len(o22.singular_points()) == 2
    o82 = oplus_space(2, 4)
    # independent oracle: plain-python scan over all 256 vectors
    cnt = 0
    for v in itertools.product((0, 1), repeat=8):
        q = (v[0] & v[1]) ^ (v[2] & v[3]) ^ (v[4] & v[5]) ^ (v[6] & v[7])
        cnt += q == 0
    assert cnt - 1 == 135  # minus the zero vector; q=2 points = vectors
    assert len(o82.singular_points()) == 135 == o82.singular_count()
    p58 = parabolic_space(8)
    assert len(p58.singular_points()) == 585 == (8**2 + 1) * (8 + 1)
    assert ominus4_space(3).singular_count() == 10


def test_ts_ti_predicates():
    o = oplus_space(2, 1)
    e1 = canonicalize(o.fv, [[1, 0]], 2)
    assert o.is_ts(e1) and o.is_ti(e1)
    z = canonicalize(o.fv, [], 2)
    assert o.is_ts(z) and o.is_ti(z)
    o8 = oplus_space(2, 4)
    for w in o8.maximal_totally_singular()[:20]:
        assert o8.is_ti(w)  # char 2: t.s. implies t.i.


def test_enumeration_sp42_brute_force():
    s = sp_space(2, 2)
    mts = s.maximal_totally_singular()
    assert len(mts) == 15
    brute = []
    for block in all_subspaces_of_dim(s.fv, 4, 2):
        for mat in block:
            sub = canonicalize(s.fv, mat, 4)
            if s.is_ti(sub):
                brute.append(sub)
    assert set(brute) == set(mts)


def test_enumeration_oplus82_brute_force():
    o = oplus_space(2, 4)
    mts = o.maximal_totally_singular()
    assert len(mts) == 270
    brute = 0
    seen = set()
    for block in all_subspaces_of_dim(o.fv, 8, 4):
        for mat in block:
            sub = canonicalize(o.fv, mat, 8)
            if o.is_ts(sub):
                brute += 1
                seen.add(sub)
    assert brute == 270
    assert seen == set(mts)


def test_enumeration_sp63_formula_and_membership():
    s = sp_space(3, 3)
    mts = s.maximal_totally_singular()
    assert len(mts) == 4 * 10 * 28  # 1120
    import random

    rng = random.Random(0)
    from polarspread.verify import _random_maximal_ts

    table = set(mts)
    for _ in range(25):
        assert _random_maximal_ts(s, rng) in table


def test_ts_type_invariant():
    for q, n in [(2, 2), (3, 2), (2, 4)]:
        o = oplus_space(q, n)
        mts = o.maximal_totally_singular()
        pairs = itertools.combinations(mts, 2)
        if q == 2 and n == 4:
            pairs = itertools.islice(pairs, 800)
        for w1, w2 in pairs:
            d = w1.intersect(w2).dim
            assert (o.ts_type(w1) == o.ts_type(w2)) == ((d - n) % 2 == 0)
        assert o.ts_type(o.m0()) == TsType.SAME


def test_two_types_through_hyperplane():
    # O+(4,2): every t.s. point lies on one line of each type
    o = oplus_space(2, 2)
    lines = o.maximal_totally_singular()
    for p in o.singular_points():
        through = [l for l in lines if l.contains(p)]
        assert len(through) == 2
        assert {o.ts_type(l) for l in through} == {TsType.SAME, TsType.OTHER}


def test_projection_and_lift_roundtrip_exhaustive():
    o = oplus_space(2, 4)
    z = o.first_nonsingular_point()
    proj = ZProjection(o, z)
    assert proj.quotient.dim == 6
    for w in o.maximal_totally_singular():
        t = proj.transport(w)
        assert t.dim == 3
        assert proj.lift(t, o.ts_type(w)) == w
    # lifts of one fixed type pairwise meet in even dimension
    ws = o.maximal_totally_singular()[:40]
    same = [w for w in ws if o.ts_type(w) == TsType.SAME]
    for a, b in itertools.combinations(same, 2):
        assert a.intersect(b).dim % 2 == 0


def test_projection_requires_nonsingular():
    o = oplus_space(2, 4)
    with pytest.raises(gf.FieldError):
        ZProjection(o, o.singular_points()[0])


def test_field_descend_oplus44():
    t4 = gf.tower(2, 2, (1,))
    fv4 = FieldView(t4, 2)
    qc = np.zeros((4, 4), dtype=np.int64)
    qc[0, 1] = 1
    qc[2, 3] = 1
    o44 = make_orthogonal(fv4, qc, "orthogonal_plus")
    dm = field_descend(o44, 1)
    assert dm.dst.dim == 8
    assert len(dm.dst.singular_points()) == 135  # plus type
    # a t.s. GF(4)-2-space descends to a t.s. GF(2)-4-space
    line = o44.maximal_totally_singular()[0]
    down = dm.subspace(line)
    assert down.dim == 4 and dm.dst.is_ts(down)


def test_field_descend_appendix_form():
    ctx = _ovoid_context(4)
    dm = field_descend(ctx.space, 1)
    assert dm.dst.dim == 16
    # polar form of the descended Q is nondegenerate
    from polarspread.linalg import rref

    assert rref(dm.dst.fv, dm.dst.gram).shape[0] == 16


def test_klein_examples():
    s = sp_space(2, 2)
    k = klein_space(2)
    l1 = canonicalize(s.fv, [[1, 0, 0, 0], [0, 0, 1, 0]], 4)  # <e1,e2>
    l2 = canonicalize(s.fv, [[0, 1, 0, 0], [0, 0, 0, 1]], 4)  # <f1,f2>
    assert s.is_ti(l1) and s.is_ti(l2)
    p1 = klein_point_of_line(s, l1)
    p2 = klein_point_of_line(s, l2)
    assert k.qform(p1) == 0 and k.qform(p2) == 0
    assert k.bform(p1, p2) != 0  # disjoint lines -> non-perpendicular points
    # meets in a point <-> perpendicular images, over all pairs of t.i. lines
    lines = s.maximal_totally_singular()
    imgs = [klein_point_of_line(s, l) for l in lines]
    assert len({tuple(p) for p in imgs}) == 15
    for (la, pa), (lb, pb) in itertools.combinations(zip(lines, imgs), 2):
        meets = la.intersect(lb).dim > 0
        assert meets == (k.bform(pa, pb) == 0)


def test_embed_identity_and_parabolic():
    o = oplus_space(2, 2)
    ident = embed(o, o, np.eye(4, dtype=np.int64))
    sub = canonicalize(o.fv, [[1, 0, 0, 0]], 4)
    assert ident.subspace(sub) == sub
    for q in (2, 8):
        em = parabolic_in_oplus8(q)
        big = oplus_space(q, 4)
        # radical of the restricted bilinear form is the image of e0
        rows = em.matrix
        r = rows[0]
        for u in rows:
            assert big.bform(r, u) == 0
        assert big.qform(r) != 0


def test_embed_rejects_form_mismatch():
    small = oplus_space(2, 1)
    big = oplus_space(2, 2)
    good = np.zeros((2, 4), dtype=np.int64)
    good[0, 0] = 1
    good[1, 1] = 1  # an actual hyperbolic pair of the big space
    embed(small, big, good)
    worse = np.zeros((2, 4), dtype=np.int64)
    worse[0, 0] = 1
    worse[1, 2] = 1  # B = 0: Gram mismatch
    with pytest.raises(gf.FieldError):
        embed(small, big, worse)


def test_isometry_between_coordinatizations():
    from polarspread.octonion import zorn_space

    for q in (2, 3):
        std = oplus_space(q, 4)
        z = zorn_space(std.fv)
        iso = find_isometry(std, z)
        rng = np.random.default_rng(1)
        for _ in range(25):
            u = rng.integers(0, q, size=8)
            v = rng.integers(0, q, size=8)
            assert z.qform(iso.vector(u)) == std.qform(u)
            assert z.bform(iso.vector(u), iso.vector(v)) == std.bform(u, v)


def test_appendix_a_form_vanishes_on_ovoid_parametrization():
    # oracle: evaluate Q(1, t, t^(q+q^2), N(t)) for every t over GF(64), q=4
    ctx = _ovoid_context(4)
    tw = ctx.tw
    for t in tw.subfield_elements(6).tolist():
        v = ctx.vec(1, t, tw.pow(t, 4 + 16), ctx.nm(t))
        assert ctx.space.qform(v) == 0
