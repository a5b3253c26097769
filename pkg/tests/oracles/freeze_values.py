"""Regenerate the frozen reference values used in the test-suite.

Independent of the package: plain conditioning series evaluated with
mpmath at 50 digits.  Run ``python tests/oracles/freeze_values.py``.
"""

import mpmath as mp

mp.mp.dps = 50


def gcp_pmf(rates, n, t):
    # direct convolution of the amplitude-j Poisson counts
    probs = [mp.mpf(1)] + [mp.mpf(0)] * n
    for j, lam in enumerate(rates, 1):
        new = [mp.mpf(0)] * (n + 1)
        for m in range(n + 1):
            for c in range(0, (n - m) // j + 1):
                new[m + c * j] += probs[m] * mp.exp(-lam * t) * (lam * t) ** c / mp.factorial(c)
        probs = new
    return probs[n]


def igcp_pmf(outer, inner, n, t, s_max=120):
    return mp.fsum(gcp_pmf(outer, n, s) * gcp_pmf(inner, s, t) for s in range(s_max + 1))


def ml3(alpha, beta, delta, x, terms=400):
    return mp.fsum(mp.rf(delta, j) * x ** j / (mp.factorial(j) * mp.gamma(alpha * j + beta)) for j in range(terms))


def frac_poisson(rate, alpha, t, z):
    x = rate * t ** alpha
    return x ** z * ml3(alpha, alpha * z + 1, z + 1, -x)


def tc_pmf_k1(lam, mu, alpha, n, t, z_max=80):
    return mp.fsum(mp.exp(-lam * m) * (lam * m) ** n / mp.factorial(n) * frac_poisson(mu, alpha, t, m)
                   for m in range(z_max + 1))


def first_passage_one(outer, inner):
    lam = sum(outer)
    mass = mp.fsum(mu * (1 - mp.exp(-j0 * lam)) for j0, mu in enumerate(inner, 1))
    nu1 = mp.fsum(mu * gcp_pmf(outer, 1, j0) for j0, mu in enumerate(inner, 1))
    return nu1 / mass


if __name__ == "__main__":
    outer, inner = [mp.mpf(1), mp.mpf("0.5")], [mp.mpf("0.6"), mp.mpf("0.2")]
    print("gcp (1,0.5) t=1:", [mp.nstr(gcp_pmf(outer, n, 1), 17) for n in range(6)])
    print("igcp t=1:", [mp.nstr(igcp_pmf(outer, inner, n, 1), 17) for n in range(6)])
    print("igcp t=2 n=10:", mp.nstr(igcp_pmf(outer, inner, 10, 2), 17))
    print("ML E^3_{0.6,2.2}(-1.3):", mp.nstr(ml3(mp.mpf("0.6"), mp.mpf("2.2"), 3, mp.mpf("-1.3")), 17))
    print("ML E_{0.5,1}(-1):", mp.nstr(ml3(mp.mpf("0.5"), 1, 1, -1), 17))
    print("P(T1<inf):", mp.nstr(first_passage_one(outer, inner), 17))
    print("tc pmf:", [mp.nstr(tc_pmf_k1(mp.mpf("0.8"), mp.mpf("0.9"), mp.mpf("0.6"), n, 1), 17) for n in range(4)])
    lam, m1, m2, t = mp.mpf("0.7"), mp.mpf("1.1"), mp.mpf("0.9"), mp.mpf("1.3")
    q2 = [mp.fsum(mp.fsum(mp.exp(-lam * m) * (lam * m) ** n / mp.factorial(n)
                          * mp.exp(-m1 * s) * (m1 * s) ** m / mp.factorial(m) for m in range(90))
                  * mp.exp(-m2 * t) * (m2 * t) ** s / mp.factorial(s) for s in range(40)) for n in range(4)]
    print("qiter q=2:", [mp.nstr(v, 17) for v in q2])
    comps = [[mp.mpf("0.5"), mp.mpf("0.3")], [mp.mpf("0.4")]]
    mv = mp.fsum(gcp_pmf(inner, m, 1) * gcp_pmf(comps[0], 2, m) * gcp_pmf(comps[1], 1, m) for m in range(100))
    print("mv (2,1) t=1:", mp.nstr(mv, 17))
