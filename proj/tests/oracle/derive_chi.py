"""Independent pure-Python derivation of the index examples frozen in test_chi.cpp.

Implements bucket histograms, cell alignment and the bound formulas from
scratch (fractions, no floats in the bucket arithmetic) and prints the values
the C++ tests assert. Run: python3 tests/oracle/derive_chi.py
"""
from fractions import Fraction
import math
import random


def bucket(v, B):
    return min(math.floor(Fraction(v) * B), B - 1)


def in_range(v, lv, uv):
    v = Fraction(v)
    return Fraction(lv) <= v < Fraction(uv) or (Fraction(uv) == 1 and v == 1)


def cp_exact(mask, roi, lv, uv):
    (r0, c0), (r1, c1) = roi
    return sum(in_range(mask[r][c], lv, uv) for r in range(r0, r1) for c in range(c0, c1))


def cp_region(mask, region, a, b, B):
    (r0, c0), (r1, c1) = region
    return sum(a <= bucket(mask[r][c], B) < b for r in range(r0, r1) for c in range(c0, c1))


def align(h, w, ch, cw, roi):
    (r0, c0), (r1, c1) = roi
    cover = ((r0 // ch * ch, c0 // cw * cw), (min(-(-r1 // ch) * ch, h), min(-(-c1 // cw) * cw, w)))
    ir0, ic0 = -(-r0 // ch) * ch, -(-c0 // cw) * cw
    ir1 = h if r1 == h else r1 // ch * ch
    ic1 = w if c1 == w else c1 // cw * cw
    inner = ((ir0, ic0), (ir1, ic1)) if ir0 < ir1 and ic0 < ic1 else None
    return cover, inner


def area(r):
    if r is None:
        return 0
    (r0, c0), (r1, c1) = r
    return (r1 - r0) * (c1 - c0)


def bounds(mask, ch, cw, B, roi, lv, uv):
    h, w = len(mask), len(mask[0])
    cover, inner = align(h, w, ch, cw, roi)
    lv, uv = Fraction(lv), Fraction(uv)
    a_lo, a_hi = math.floor(lv * B), math.ceil(lv * B)
    b_lo, b_hi = (B, B) if uv == 1 else (math.floor(uv * B), math.ceil(uv * B))
    cpi = (lambda a, b: cp_region(mask, inner, a, b, B) if inner and a < b else 0)
    up = min(cp_region(mask, cover, a_lo, b_hi, B), cpi(a_lo, b_hi) + area(roi) - area(inner))
    lo = max(cpi(a_hi, b_lo), cp_region(mask, cover, a_hi, b_lo, B) - (area(cover) - area(roi)), 0)
    return lo, up


if __name__ == "__main__":
    m = [[0.9 if r < 2 and c < 2 else 0.1 for c in range(4)] for r in range(4)]
    roi = ((0, 0), (3, 3))
    print("4x4 example, [0.5,1.0]:", bounds(m, 2, 2, 2, roi, 0.5, 1.0), "exact", cp_exact(m, roi, 0.5, 1.0))
    print("4x4 example, [0.6,1.0]:", bounds(m, 2, 2, 2, roi, 0.6, 1.0), "exact", cp_exact(m, roi, 0.6, 1.0))
    print("align cell 2, roi [1,3)^2 on 4x4:", align(4, 4, 2, 2, ((1, 1), (3, 3))))
    print("align cell 2, roi [0,3)^2 on 4x4:", align(4, 4, 2, 2, ((0, 0), (3, 3))))

    # 8x8 mask from a fixed sequence of float32-representable values k/64.
    rng = random.Random(42)
    m8 = [[rng.randrange(64) / 64 for _ in range(8)] for _ in range(8)]
    print("8x8 values (x64):", [[int(v * 64) for v in row] for row in m8])
    left = ((0, 0), (8, 4))
    print("8x8 left half, a=2,b=4 (B=4):", cp_region(m8, left, 2, 4, 4), "exact [0.5,1.0]", cp_exact(m8, left, 0.5, 1.0))
    print("5x4 mask cell 2x2 counts[0] per cell:",
          [[min(2, 5 - r) * min(2, 4 - c) for c in range(0, 4, 2)] for r in range(0, 5, 2)])
    # uniform 0.9 with B = 2: bucket 1 everywhere
    print("bucket(0.9, 2) =", bucket(0.9, 2))
    m2 = [[0.0, 0.5], [0.5, 0.9]]
    print("cp_exact 2x2 [0.5,1.0):", cp_exact(m2, ((0, 0), (2, 2)), 0.5, 1.0))
