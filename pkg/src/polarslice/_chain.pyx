# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled radial-chain kernels.

Each kernel advances the radius component of an exact slice-sampling chain;
the recursions are sequential (step i+1 needs step i) so this loop is the
hot path no array library can vectorize. Draws come straight from the numpy
BitGenerator, two doubles per step in (u1, u2) order, each mapped to (0, 1]
via 1 - u. The pure-Python twins in ``_chainpy`` consume the same stream in
the same order, so both backends produce bit-identical output.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport fmin, log, pow, sqrt

from numpy.random cimport bitgen_t

import numpy as np

BACKEND = "compiled"


cdef inline double _u(bitgen_t *rng) noexcept nogil:
    # (0, 1]: log of the result is always finite.
    return 1.0 - rng.next_double(rng.state)


cdef bitgen_t *_raw(object bg):
    return <bitgen_t *> PyCapsule_GetPointer(bg.capsule, "BitGenerator")


def powerlaw_chain(gen, double r0, Py_ssize_t n, double k, double m,
                   double alpha, double kappa):
    """Radii of a chain whose slice factor is exp(-alpha * r**m).

    ``kappa`` caps the slice radius (pass inf for full support); the radial
    draw is R * u2**(1/k) with R the slice's outer radius.
    """
    cdef bitgen_t *rng
    cdef double r = r0, u1, u2, neglogt
    cdef double inv_m = 1.0 / m, inv_k = 1.0 / k
    cdef Py_ssize_t i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] buf = out
    bg = gen.bit_generator
    rng = _raw(bg)
    with bg.lock, nogil:
        for i in range(n):
            u1 = _u(rng)
            u2 = _u(rng)
            neglogt = alpha * pow(r, m) - log(u1)
            r = fmin(pow(neglogt / alpha, inv_m), kappa) * pow(u2, inv_k)
            buf[i] = r
    return out


def pareto_chain(gen, double r0, Py_ssize_t n, double k, double m, double eps):
    """Radii of a chain whose slice factor is r**-(k+m) on r >= eps."""
    cdef bitgen_t *rng
    cdef double r = r0, u1, u2, a
    cdef double inv_k = 1.0 / k, expo = -k / (k + m), ek = pow(eps, k)
    cdef Py_ssize_t i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] buf = out
    bg = gen.bit_generator
    rng = _raw(bg)
    with bg.lock, nogil:
        for i in range(n):
            u1 = _u(rng)
            u2 = _u(rng)
            a = pow(r, k) * pow(u1, expo)
            r = pow(u2 * a + (1.0 - u2) * ek, inv_k)
            buf[i] = r
    return out


def stdt_chain(gen, double r0, Py_ssize_t n, Py_ssize_t d, double m):
    """Radii of the uniform-slice chain for (1 + r^2/m)^(-(d+m)/2)."""
    cdef bitgen_t *rng
    cdef double r = r0, u1, u2
    cdef double inv_d = 1.0 / d, expo = -2.0 / (d + m)
    cdef Py_ssize_t i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] buf = out
    bg = gen.bit_generator
    rng = _raw(bg)
    with bg.lock, nogil:
        for i in range(n):
            u1 = _u(rng)
            u2 = _u(rng)
            r = pow(u2, inv_d) * sqrt(pow(u1, expo) * (m + r * r) - m)
            buf[i] = r
    return out


def chi_chain(gen, double r0, double chi0, double[::1] chis, double k, double m):
    """Radii given per-step direction weights chi_i (slice factor
    exp(-chi * r**m)); chis[i] is the weight of the direction adopted at
    step i, chi0 the weight of the initial state's direction."""
    cdef bitgen_t *rng
    cdef double r = r0, cprev = chi0, u1, u2, neglogt, cnew
    cdef double inv_m = 1.0 / m, inv_k = 1.0 / k
    cdef Py_ssize_t i, n = chis.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] buf = out
    bg = gen.bit_generator
    rng = _raw(bg)
    with bg.lock, nogil:
        for i in range(n):
            u1 = _u(rng)
            u2 = _u(rng)
            neglogt = cprev * pow(r, m) - log(u1)
            cnew = chis[i]
            r = pow(neglogt / cnew, inv_m) * pow(u2, inv_k)
            buf[i] = r
            cprev = cnew
    return out
