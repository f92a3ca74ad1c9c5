"""Maximum error of the [N/N] Bose approximant on x in [0.1, 20], 60-digit arithmetic.

The decomposition comes from the [N-1/N] Pade route (mpmath polyroots), a different
algorithm from the moment-system solve in psd_moments.py.
"""
import mpmath as mp

mp.mp.dps = 120


def psd(n):
    r = mp.mpf(1) / (4 * (n + 1) * (2 * n + 3))
    g = [mp.bernoulli(2 * j) / mp.factorial(2 * j) for j in range(1, 2 * n + 2)]
    g[0] -= r
    if n == 0:
        return [], [], r
    a = mp.matrix(n, n)
    b = mp.matrix(n, 1)
    for row, m in enumerate(range(n, 2 * n)):
        for i in range(1, n + 1):
            a[row, i - 1] = g[m - i]
        b[row] = -g[m]
    q = [mp.mpf(1)] + list(mp.lu_solve(a, b))
    p = [sum(q[i] * g[m - i] for i in range(m + 1)) for m in range(n)]
    roots = mp.polyroots(q[::-1], maxsteps=500, extraprec=500)
    s2 = sorted(-mp.re(z) for z in roots)
    dq = lambda y: sum(i * q[i] * y ** (i - 1) for i in range(1, n + 1))
    pp = lambda y: sum(p[i] * y ** i for i in range(n))
    return [mp.sqrt(s) for s in s2], [pp(-s) / dq(-s) / 2 for s in s2], r


def approx(dec, x):
    xi, eta, r = dec
    return 1 / x + mp.mpf(1) / 2 + sum(2 * e * x / (x * x + s * s) for e, s in zip(eta, xi)) + r * x


if __name__ == "__main__":
    xs = [mp.mpf("0.1") + (20 - mp.mpf("0.1")) * i / 4000 for i in range(4001)]
    for n in range(0, 9):
        dec = psd(n)
        err = max(abs(approx(dec, x) - 1 / (1 - mp.exp(-x))) for x in xs)
        print(f"N={n} max_err={mp.nstr(err, 6)}")
