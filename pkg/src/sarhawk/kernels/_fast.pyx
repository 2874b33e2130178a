# Compiled twin of _ref.py. Same contracts, same results to float precision.
# Keep the two files in sync; tests/test_kernels.py enforces parity.

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "cython"


def batch_scores(variants, bank):
    cdef double[:, :, ::1] v = np.ascontiguousarray(variants, dtype=np.float64)
    cdef double[:, :, ::1] b = np.ascontiguousarray(bank, dtype=np.float64)
    cdef Py_ssize_t k = v.shape[0], n = b.shape[0], m = v.shape[1]
    if b.shape[1] != m:
        raise ValueError("variant and bank point counts differ")
    out_arr = np.empty((k, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, p
    cdef double acc, dx, dy, dz
    for i in range(k):
        for j in range(n):
            acc = 0.0
            for p in range(m):
                dx = v[i, p, 0] - b[j, p, 0]
                dy = v[i, p, 1] - b[j, p, 1]
                dz = v[i, p, 2] - b[j, p, 2]
                acc += dx * dx + dy * dy + dz * dz
            out[i, j] = sqrt(acc)
    return out_arr


def resample_polyline(pts, m):
    cdef double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t mm = m
    cdef cnp.ndarray[cnp.float64_t, ndim=1] seglen = np.empty(n - 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cum = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, total, d, f

    cum[0] = 0.0
    for i in range(n - 1):
        dx = p[i + 1, 0] - p[i, 0]
        dy = p[i + 1, 1] - p[i, 1]
        dz = p[i + 1, 2] - p[i, 2]
        seglen[i] = sqrt(dx * dx + dy * dy + dz * dz)
        cum[i + 1] = cum[i] + seglen[i]
    total = cum[n - 1]
    if total <= 0.0:
        raise ValueError("polyline has zero arc length")

    out_arr = np.empty((mm, 3), dtype=np.float64)
    src_arr = np.empty(mm, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] src = src_arr
    j = 0
    for i in range(mm):
        d = total * i / (mm - 1)
        while j < n - 2 and cum[j + 1] < d:
            j += 1
        while seglen[j] == 0.0 and j < n - 2:
            j += 1
        if seglen[j] > 0.0:
            f = (d - cum[j]) / seglen[j]
        else:
            f = 0.0
        if f < 0.0:
            f = 0.0
        elif f > 1.0:
            f = 1.0
        out[i, 0] = p[j, 0] + f * (p[j + 1, 0] - p[j, 0])
        out[i, 1] = p[j, 1] + f * (p[j + 1, 1] - p[j, 1])
        out[i, 2] = p[j, 2] + f * (p[j + 1, 2] - p[j, 2])
        src[i] = j + f
    out[0, 0] = p[0, 0]
    out[0, 1] = p[0, 1]
    out[0, 2] = p[0, 2]
    out[mm - 1, 0] = p[n - 1, 0]
    out[mm - 1, 1] = p[n - 1, 1]
    out[mm - 1, 2] = p[n - 1, 2]
    src[mm - 1] = n - 1.0
    return out_arr, src_arr


def point_clear(p, spheres, boxes):
    cdef double px = p[0], py = p[1], pz = p[2]
    cdef double[:, ::1] s
    cdef double[:, ::1] b
    cdef Py_ssize_t i
    cdef double dx, dy, dz
    if len(spheres):
        s = np.ascontiguousarray(spheres, dtype=np.float64)
        for i in range(s.shape[0]):
            dx = s[i, 0] - px
            dy = s[i, 1] - py
            dz = s[i, 2] - pz
            if dx * dx + dy * dy + dz * dz <= s[i, 3] * s[i, 3]:
                return False
    if len(boxes):
        b = np.ascontiguousarray(boxes, dtype=np.float64)
        for i in range(b.shape[0]):
            if (b[i, 0] <= px <= b[i, 3] and b[i, 1] <= py <= b[i, 4]
                    and b[i, 2] <= pz <= b[i, 5]):
                return False
    return True


cdef bint _hits_box(double* p0, double* d, double lox, double loy, double loz,
                    double hix, double hiy, double hiz) nogil:
    cdef double tmin = 0.0, tmax = 1.0
    cdef double t1, t2, tmp
    cdef double lo[3]
    cdef double hi[3]
    cdef Py_ssize_t axis
    lo[0] = lox; lo[1] = loy; lo[2] = loz
    hi[0] = hix; hi[1] = hiy; hi[2] = hiz
    for axis in range(3):
        if d[axis] == 0.0:
            if p0[axis] < lo[axis] or p0[axis] > hi[axis]:
                return False
        else:
            t1 = (lo[axis] - p0[axis]) / d[axis]
            t2 = (hi[axis] - p0[axis]) / d[axis]
            if t1 > t2:
                tmp = t1; t1 = t2; t2 = tmp
            if t1 > tmin:
                tmin = t1
            if t2 < tmax:
                tmax = t2
            if tmin > tmax:
                return False
    return True


def segment_clear(p0, p1, spheres, boxes):
    cdef double a[3]
    cdef double d[3]
    cdef double dd, t, cx, cy, cz, r, qx, qy, qz
    cdef double[:, ::1] s
    cdef double[:, ::1] b
    cdef Py_ssize_t i
    a[0] = p0[0]; a[1] = p0[1]; a[2] = p0[2]
    d[0] = p1[0] - a[0]; d[1] = p1[1] - a[1]; d[2] = p1[2] - a[2]
    dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2]

    if len(spheres):
        s = np.ascontiguousarray(spheres, dtype=np.float64)
        for i in range(s.shape[0]):
            cx = s[i, 0]; cy = s[i, 1]; cz = s[i, 2]; r = s[i, 3]
            if dd == 0.0:
                t = 0.0
            else:
                t = ((cx - a[0]) * d[0] + (cy - a[1]) * d[1] + (cz - a[2]) * d[2]) / dd
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            qx = a[0] + t * d[0] - cx
            qy = a[1] + t * d[1] - cy
            qz = a[2] + t * d[2] - cz
            if qx * qx + qy * qy + qz * qz <= r * r:
                return False

    if len(boxes):
        b = np.ascontiguousarray(boxes, dtype=np.float64)
        for i in range(b.shape[0]):
            if _hits_box(a, d, b[i, 0], b[i, 1], b[i, 2], b[i, 3], b[i, 4], b[i, 5]):
                return False
    return True
