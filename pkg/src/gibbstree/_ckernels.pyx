# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled rejection-sampling kernels; see ``_pykernels`` for the contract.

Uniforms are read straight from the numpy bit generator's ``next_double``
with the GIL released, so independent generators can run on separate
threads.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport copysign, fabs, pow
from libc.stdint cimport int64_t
from numpy.random cimport bitgen_t

cdef double ENVELOPE_SLACK = 1.0 + 1e-12


cdef inline double _g(double t, double inv_m) noexcept nogil:
    cdef double v = 4.0 * t - 2.0
    if v == 0.0:
        return 0.0
    return copysign(pow(fabs(v), inv_m), v)


cdef inline double _ipow(double x, int k) noexcept nogil:
    cdef double r = 1.0
    cdef int i
    for i in range(k):
        r *= x
    return r


cdef bitgen_t *_bitgen(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("rng does not expose a numpy BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline int _root(bitgen_t *bg, double c1, double a, int k, double inv_m,
                      double env, double *out, int64_t *attempts) noexcept nogil:
    cdef double u, d
    while True:
        attempts[0] += 1
        u = bg.next_double(bg.state)
        d = _ipow(c1 + a * _g(u, inv_m), k + 1)
        if d > env * ENVELOPE_SLACK:
            out[0] = u
            return 1
        if bg.next_double(bg.state) * env <= d:
            out[0] = u
            return 0


cdef inline int _child(bitgen_t *bg, double t, double c1, double a, double coupling,
                       int k, double inv_m, double env, double *out,
                       int64_t *attempts) noexcept nogil:
    cdef double gt = _g(t, inv_m)
    cdef double u, gu, d
    while True:
        attempts[0] += 1
        u = bg.next_double(bg.state)
        gu = _g(u, inv_m)
        d = (1.0 + coupling * gt * gu) * _ipow(c1 + a * gu, k)
        if d > env * ENVELOPE_SLACK:
            out[0] = u
            return 1
        if bg.next_double(bg.state) * env <= d:
            out[0] = u
            return 0


def draw_roots(rng, double[::1] out, double c1, double a, int k, double inv_m,
               double phi_max):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef double env = _ipow(phi_max, k + 1)
    cdef int64_t total = 0
    cdef Py_ssize_t i
    cdef int status = 0
    cdef double u
    lock = rng.bit_generator.lock
    with lock:
        with nogil:
            for i in range(out.shape[0]):
                status = _root(bg, c1, a, k, inv_m, env, &u, &total)
                if status:
                    break
                out[i] = u
    return total, status


def draw_children(rng, const double[::1] parents, double[::1] out, double c1, double a,
                  double coupling, double theta, int k, double inv_m, double phi_max):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef double env = (1.0 + theta) * _ipow(phi_max, k)
    cdef int64_t total = 0
    cdef Py_ssize_t i
    cdef int status = 0
    cdef double u
    lock = rng.bit_generator.lock
    with lock:
        with nogil:
            for i in range(out.shape[0]):
                status = _child(bg, parents[i], c1, a, coupling, k, inv_m, env, &u, &total)
                if status:
                    break
                out[i] = u
    return total, status


def draw_forest(rng, double[:, ::1] out, const int64_t[::1] parent, double c1, double a,
                double coupling, double theta, int k, double inv_m, double phi_max):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef double root_env = _ipow(phi_max, k + 1)
    cdef double child_env = (1.0 + theta) * _ipow(phi_max, k)
    cdef int64_t root_total = 0
    cdef int64_t child_total = 0
    cdef Py_ssize_t c, v
    cdef int status = 0
    cdef double u
    lock = rng.bit_generator.lock
    with lock:
        with nogil:
            for c in range(out.shape[0]):
                status = _root(bg, c1, a, k, inv_m, root_env, &u, &root_total)
                if status:
                    break
                out[c, 0] = u
                for v in range(1, out.shape[1]):
                    status = _child(bg, out[c, parent[v]], c1, a, coupling, k, inv_m,
                                    child_env, &u, &child_total)
                    if status:
                        break
                    out[c, v] = u
                if status:
                    break
    return root_total, child_total, status

