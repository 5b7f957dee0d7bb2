"""Pure-Python twins of the compiled radial-chain kernels.

Same signatures, same stream consumption (two doubles per step, u1 then u2,
each mapped to (0, 1] via 1 - u), same libm arithmetic: output is
bit-identical to ``_chain``. Roughly two orders of magnitude slower, which
is still fine for every test in this repository.
"""

from math import log, sqrt, pow as fpow

import numpy as np

BACKEND = "python"


def powerlaw_chain(gen, r0, n, k, m, alpha, kappa):
    us = gen.random(2 * n)
    out = np.empty(n, dtype=np.float64)
    r = r0
    inv_m = 1.0 / m
    inv_k = 1.0 / k
    j = 0
    for i in range(n):
        u1 = 1.0 - us[j]
        u2 = 1.0 - us[j + 1]
        j += 2
        neglogt = alpha * fpow(r, m) - log(u1)
        r = min(fpow(neglogt / alpha, inv_m), kappa) * fpow(u2, inv_k)
        out[i] = r
    return out


def pareto_chain(gen, r0, n, k, m, eps):
    us = gen.random(2 * n)
    out = np.empty(n, dtype=np.float64)
    r = r0
    inv_k = 1.0 / k
    expo = -k / (k + m)
    ek = fpow(eps, k)
    j = 0
    for i in range(n):
        u1 = 1.0 - us[j]
        u2 = 1.0 - us[j + 1]
        j += 2
        a = fpow(r, k) * fpow(u1, expo)
        r = fpow(u2 * a + (1.0 - u2) * ek, inv_k)
        out[i] = r
    return out


def stdt_chain(gen, r0, n, d, m):
    us = gen.random(2 * n)
    out = np.empty(n, dtype=np.float64)
    r = r0
    inv_d = 1.0 / d
    expo = -2.0 / (d + m)
    j = 0
    for i in range(n):
        u1 = 1.0 - us[j]
        u2 = 1.0 - us[j + 1]
        j += 2
        r = fpow(u2, inv_d) * sqrt(fpow(u1, expo) * (m + r * r) - m)
        out[i] = r
    return out


def chi_chain(gen, r0, chi0, chis, k, m):
    n = len(chis)
    us = gen.random(2 * n)
    out = np.empty(n, dtype=np.float64)
    r = r0
    cprev = chi0
    inv_m = 1.0 / m
    inv_k = 1.0 / k
    j = 0
    for i in range(n):
        u1 = 1.0 - us[j]
        u2 = 1.0 - us[j + 1]
        j += 2
        neglogt = cprev * fpow(r, m) - log(u1)
        cnew = chis[i]
        r = fpow(neglogt / cnew, inv_m) * fpow(u2, inv_k)
        out[i] = r
        cprev = cnew
    return out
