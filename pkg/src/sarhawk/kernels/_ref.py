"""Pure numpy kernels: the fallback used when the compiled twin is absent.

Both implementations must agree to float precision; tests/test_kernels.py
checks parity and benchmarks/bench_kernels.py compares throughput.
"""

import numpy as np

BACKEND = "numpy"


def batch_scores(variants, bank):
    """Euclidean distances between gesture variants and a template bank.

    variants: (k, m, 3) float64, bank: (n, m, 3) float64 -> (k, n) float64,
    each entry sqrt(sum over all m points of squared 3D differences).
    """
    variants = np.asarray(variants, dtype=float)
    bank = np.asarray(bank, dtype=float)
    diff = variants[:, None, :, :] - bank[None, :, :, :]
    return np.sqrt(np.einsum("knmc,knmc->kn", diff, diff))


def resample_polyline(pts, m):
    """Resample a polyline to m points equally spaced along arc length.

    Returns (out (m,3), srcpos (m,)) where srcpos[i] = j + f places output
    point i at fraction f of input segment j (used to interpolate per-point
    attributes such as orientation). Endpoints are preserved exactly.
    Total arc length must be positive.
    """
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[0]
    seg = np.diff(pts, axis=0)
    seglen = np.linalg.norm(seg, axis=1)
    cum = np.concatenate(([0.0], np.cumsum(seglen)))
    total = cum[-1]
    if total <= 0.0:
        raise ValueError("polyline has zero arc length")

    out = np.empty((m, 3))
    srcpos = np.empty(m)
    j = 0
    for i in range(m):
        d = total * i / (m - 1)
        while j < n - 2 and cum[j + 1] < d:
            j += 1
        while seglen[j] == 0.0 and j < n - 2:
            j += 1
        f = (d - cum[j]) / seglen[j] if seglen[j] > 0.0 else 0.0
        f = min(max(f, 0.0), 1.0)
        out[i] = pts[j] + f * seg[j]
        srcpos[i] = j + f
    out[0] = pts[0]
    out[-1] = pts[-1]
    srcpos[-1] = n - 1.0
    return out, srcpos


def point_clear(p, spheres, boxes):
    """True when point p hits no obstacle. spheres (s,4) rows (cx,cy,cz,r);
    boxes (b,6) rows (lox,loy,loz,hix,hiy,hiz)."""
    p = np.asarray(p, dtype=float)
    if len(spheres):
        spheres = np.asarray(spheres, dtype=float)
        d2 = np.sum((spheres[:, :3] - p) ** 2, axis=1)
        if np.any(d2 <= spheres[:, 3] ** 2):
            return False
    if len(boxes):
        boxes = np.asarray(boxes, dtype=float)
        inside = np.all(boxes[:, :3] <= p, axis=1) & np.all(p <= boxes[:, 3:], axis=1)
        if np.any(inside):
            return False
    return True


def segment_clear(p0, p1, spheres, boxes):
    """True when the segment p0-p1 intersects no obstacle."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    d = p1 - p0
    dd = float(np.dot(d, d))

    if len(spheres):
        spheres = np.asarray(spheres, dtype=float)
        for cx, cy, cz, r in spheres:
            c = np.array([cx, cy, cz])
            if dd == 0.0:
                t = 0.0
            else:
                t = float(np.dot(c - p0, d)) / dd
                t = min(max(t, 0.0), 1.0)
            closest = p0 + t * d
            if float(np.dot(closest - c, closest - c)) <= r * r:
                return False

    if len(boxes):
        boxes = np.asarray(boxes, dtype=float)
        for row in boxes:
            if _segment_hits_box(p0, d, dd, row[:3], row[3:]):
                return False
    return True


def _segment_hits_box(p0, d, dd, lo, hi):
    # slab test over t in [0, 1]
    tmin, tmax = 0.0, 1.0
    for axis in range(3):
        if d[axis] == 0.0:
            if p0[axis] < lo[axis] or p0[axis] > hi[axis]:
                return False
        else:
            t1 = (lo[axis] - p0[axis]) / d[axis]
            t2 = (hi[axis] - p0[axis]) / d[axis]
            if t1 > t2:
                t1, t2 = t2, t1
            tmin = max(tmin, t1)
            tmax = min(tmax, t2)
            if tmin > tmax:
                return False
    return True
