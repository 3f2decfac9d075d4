# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled great-circle distance kernels."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, asin, sqrt, fabs, M_PI
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

cdef double DEG = M_PI / 180.0


cdef inline double _hav(double p1, double cp1, double lon1, double p2, double cp2,
                        double lon2, double radius) nogil:
    """Haversine from radian latitudes ``p`` with their cosines ``cp`` precomputed."""
    cdef double sdp = sin((p2 - p1) * 0.5)
    cdef double sdl = sin((lon2 - lon1) * DEG * 0.5)
    cdef double h = sdp * sdp + cp1 * cp2 * sdl * sdl
    if h > 1.0:
        h = 1.0
    return 2.0 * radius * asin(sqrt(h))


cdef void _prep(const double[::1] lat, double *p, double *cp) nogil:
    cdef Py_ssize_t i
    for i in range(lat.shape[0]):
        p[i] = lat[i] * DEG
        cp[i] = cos(p[i])


def haversine_matrix(const double[::1] lat_a, const double[::1] lon_a,
                     const double[::1] lat_b, const double[::1] lon_b, double radius):
    cdef Py_ssize_t na = lat_a.shape[0], nb = lat_b.shape[0], i, j
    out = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double *pa = <double *> malloc((na + 1) * sizeof(double))
    cdef double *ca = <double *> malloc((na + 1) * sizeof(double))
    cdef double *pb = <double *> malloc((nb + 1) * sizeof(double))
    cdef double *cb = <double *> malloc((nb + 1) * sizeof(double))
    try:
        if pa == NULL or ca == NULL or pb == NULL or cb == NULL:
            raise MemoryError()
        with nogil:
            _prep(lat_a, pa, ca)
            _prep(lat_b, pb, cb)
            for i in range(na):
                for j in range(nb):
                    o[i, j] = _hav(pa[i], ca[i], lon_a[i], pb[j], cb[j], lon_b[j], radius)
        return out
    finally:
        free(pa); free(ca); free(pb); free(cb)


cdef bint _grow(long **bi, long **bj, double **bd, Py_ssize_t cap) nogil:
    """Resize the three pair buffers; on failure the old buffers stay valid."""
    cdef void *t
    t = realloc(bi[0], cap * sizeof(long))
    if t == NULL:
        return False
    bi[0] = <long *> t
    t = realloc(bj[0], cap * sizeof(long))
    if t == NULL:
        return False
    bj[0] = <long *> t
    t = realloc(bd[0], cap * sizeof(double))
    if t == NULL:
        return False
    bd[0] = <double *> t
    return True


def threshold_pairs(const double[::1] lat, const double[::1] lon, double threshold,
                    double radius):
    """All pairs i < j within ``threshold`` km, in lexicographic (i, j) order."""
    cdef Py_ssize_t n = lat.shape[0], i, j, count = 0, cap = 1024
    cdef double d
    # great-circle distance >= radius * |dlat|, so this band test is exact
    cdef double band = threshold / radius / DEG
    cdef long *bi = <long *> malloc(cap * sizeof(long))
    cdef long *bj = <long *> malloc(cap * sizeof(long))
    cdef double *bd = <double *> malloc(cap * sizeof(double))
    cdef double *p = <double *> malloc((n + 1) * sizeof(double))
    cdef double *cp = <double *> malloc((n + 1) * sizeof(double))
    try:
        if bi == NULL or bj == NULL or bd == NULL or p == NULL or cp == NULL:
            raise MemoryError()
        with nogil:
            _prep(lat, p, cp)
            for i in range(n):
                for j in range(i + 1, n):
                    if fabs(lat[j] - lat[i]) > band:
                        continue
                    d = _hav(p[i], cp[i], lon[i], p[j], cp[j], lon[j], radius)
                    if d <= threshold:
                        if count == cap:
                            if not _grow(&bi, &bj, &bd, cap * 2):
                                with gil:
                                    raise MemoryError()
                            cap *= 2
                        bi[count] = i
                        bj[count] = j
                        bd[count] = d
                        count += 1
        oi = np.empty(count, dtype=np.int64)
        oj = np.empty(count, dtype=np.int64)
        od = np.empty(count, dtype=np.float64)
        for i in range(count):
            oi[i] = bi[i]
            oj[i] = bj[i]
            od[i] = bd[i]
        return oi, oj, od
    finally:
        free(bi); free(bj); free(bd); free(p); free(cp)
