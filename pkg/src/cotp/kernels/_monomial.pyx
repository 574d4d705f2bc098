# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled monomial-conjugation kernels (see ``_fallback`` for semantics)."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _conj_into(double complex[:, ::1] out, const double complex[:, ::1] rho,
                            const long long[::1] perm, const double complex[::1] phase,
                            Py_ssize_t rest, bint add) noexcept nogil:
    cdef Py_ssize_t da = perm.shape[0]
    cdef Py_ssize_t a, b, r, s, ia, ib, oa, ob
    cdef double complex pa, c
    for a in range(da):
        pa = phase[a]
        oa = perm[a] * rest
        ia = a * rest
        for b in range(da):
            c = pa * phase[b].conjugate()
            ob = perm[b] * rest
            ib = b * rest
            for r in range(rest):
                if add:
                    for s in range(rest):
                        out[oa + r, ob + s] = out[oa + r, ob + s] + c * rho[ia + r, ib + s]
                else:
                    for s in range(rest):
                        out[oa + r, ob + s] = c * rho[ia + r, ib + s]


def conjugate(rho, perm, phase, Py_ssize_t rest):
    cdef const double complex[:, ::1] rv = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef const long long[::1] pv = np.ascontiguousarray(perm, dtype=np.int64)
    cdef const double complex[::1] phv = np.ascontiguousarray(phase, dtype=np.complex128)
    out = np.empty((rv.shape[0], rv.shape[1]), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    with nogil:
        _conj_into(ov, rv, pv, phv, rest, False)
    return out


def accumulate(out, rho, perms, phases, Py_ssize_t rest):
    cdef double complex[:, ::1] ov = out
    cdef const double complex[:, ::1] rv = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef const long long[:, ::1] pv = np.ascontiguousarray(perms, dtype=np.int64)
    cdef const double complex[:, ::1] phv = np.ascontiguousarray(phases, dtype=np.complex128)
    cdef Py_ssize_t k
    with nogil:
        for k in range(pv.shape[0]):
            _conj_into(ov, rv, pv[k], phv[k], rest, True)
    return out
