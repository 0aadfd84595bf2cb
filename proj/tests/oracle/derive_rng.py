"""Reference outputs for the documented generator (splitmix64 seeding, xorshift64*).

Prints the first outside-roi bytes for the augmentation example frozen in
test_image.cpp. Run: python3 tests/oracle/derive_rng.py
"""
M = (1 << 64) - 1


def splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & M
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return state, z ^ (z >> 31)


class Xorshift64Star:
    def __init__(self, seed):
        _, self.s = splitmix64(seed)
        if self.s == 0:
            self.s = 0x9E3779B97F4A7C15

    def next(self):
        s = self.s
        s ^= s >> 12
        s ^= (s << 25) & M
        s ^= s >> 27
        self.s = s
        return (s * 0x2545F4914F6CDD1D) & M

    def next_byte(self):
        return self.next() >> 56


if __name__ == "__main__":
    print("splitmix64(0) first output: %#018x" % splitmix64(0)[1])
    g = Xorshift64Star(7)
    print("seed 7 first bytes:", [g.next_byte() for _ in range(8)])
    # 3x3 grayscale image, roi = centre pixel ((1,1),(2,2)): 8 outside pixels,
    # row-major, replaced in order; centre keeps its byte.
    g = Xorshift64Star(7)
    out = []
    for r in range(3):
        for c in range(3):
            out.append(100 if (r, c) == (1, 1) else g.next_byte())
    print("3x3 P5 augment seed 7, centre kept:", out)
