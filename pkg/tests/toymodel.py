"""Toy one-branch model for the entry-map derivative bound.

g(x) = x + c*x^2 on [0, 1] is an orientation-preserving diffeomorphism with
its unique fixed point at the left endpoint and |g' - 1| <= 2c.  The first
entry map G of [0, 1] into J = (1, 1+c) acts as g^n on the ladder interval
A_n = (a_n, a_{n-1}), where a_n is the n-th preimage of 1.  Everything here
is computed directly from g, independent of the package under test.
"""


def entry_ladder(c=0.05, n_levels=25, probes=12):
    """Return (per-level G' probe values, measured K, lower bound)."""

    def g(x):
        return x + c * x * x

    def dg(x):
        return 1.0 + 2.0 * c * x

    eps = 2.0 * c            # sup |g' - 1| on [0, 1]
    j_len = c                # |J| = g(1) - 1
    a = [1.0]
    for _ in range(n_levels):
        target = a[-1]
        lo, hi = 0.0, target
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if g(mid) < target:
                lo = mid
            else:
                hi = mid
        a.append(0.5 * (lo + hi))

    levels = []
    for n in range(1, n_levels + 1):
        lo, hi = a[n], a[n - 1]
        w = hi - lo
        vals = []
        for k in range(probes):
            x = lo + w * (k + 0.5) / probes
            d = 1.0
            for _ in range(n):
                d *= dg(x)
                x = g(x)
            assert 1.0 < x < 1.0 + c, "probe left the ladder at level %d" % n
            vals.append(d)
        levels.append(vals)

    K = max(max(v) / min(v) for v in levels)
    bound = (1.0 / (eps * K)) * j_len / 1.0    # |J| / |b - a|
    return levels, K, bound
