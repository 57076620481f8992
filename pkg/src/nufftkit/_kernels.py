"""Compiled scatter/gather loops shared by the spreading and
interpolation paths.

All functions take fine-grid frame coordinates v = (x + pi)/h (float64)
and release the GIL so thread pools get real parallelism.  Kernel weights
are always evaluated in float64; accumulation happens in the array dtype.
The w covered cells per axis start at ceil(v - w/2); global-grid targets
wrap indices mod n, local padded buffers index with s = l - offset and
never wrap.
"""

import math

import numpy as np
from numba import njit

JIT_OPTS = dict(nogil=True, cache=True)


@njit(**JIT_OPTS)
def es_value(beta, z):
    """exp(beta*(sqrt(1-z^2)-1)) on |z| <= 1, else 0."""
    t = 1.0 - z * z
    if t < 0.0:
        return 0.0
    return math.exp(beta * (math.sqrt(t) - 1.0))


@njit(**JIT_OPTS)
def _kernel_row(v, w, beta, start, row):
    inv = 2.0 / w
    for r in range(w):
        row[r] = es_value(beta, (start + r - v) * inv)


@njit(**JIT_OPTS)
def spread_2d(v1, v2, c, w, beta, out):
    n2, n1 = out.shape
    row1 = np.empty(w, np.float64)
    row2 = np.empty(w, np.float64)
    half = 0.5 * w
    for j in range(v1.size):
        i1 = int(math.ceil(v1[j] - half))
        i2 = int(math.ceil(v2[j] - half))
        _kernel_row(v1[j], w, beta, i1, row1)
        _kernel_row(v2[j], w, beta, i2, row2)
        cj = c[j]
        for b in range(w):
            l2 = (i2 + b) % n2
            t2 = cj * row2[b]
            for a in range(w):
                l1 = (i1 + a) % n1
                out[l2, l1] += t2 * row1[a]


@njit(**JIT_OPTS)
def spread_3d(v1, v2, v3, c, w, beta, out):
    n3, n2, n1 = out.shape
    row1 = np.empty(w, np.float64)
    row2 = np.empty(w, np.float64)
    row3 = np.empty(w, np.float64)
    half = 0.5 * w
    for j in range(v1.size):
        i1 = int(math.ceil(v1[j] - half))
        i2 = int(math.ceil(v2[j] - half))
        i3 = int(math.ceil(v3[j] - half))
        _kernel_row(v1[j], w, beta, i1, row1)
        _kernel_row(v2[j], w, beta, i2, row2)
        _kernel_row(v3[j], w, beta, i3, row3)
        cj = c[j]
        for e in range(w):
            l3 = (i3 + e) % n3
            t3 = cj * row3[e]
            for b in range(w):
                l2 = (i2 + b) % n2
                t2 = t3 * row2[b]
                for a in range(w):
                    l1 = (i1 + a) % n1
                    out[l3, l2, l1] += t2 * row1[a]


@njit(**JIT_OPTS)
def spread_local_2d(v1, v2, c, w, beta, off1, off2, buf):
    """Accumulate into a padded-bin buffer; indices are local, no wrap."""
    row1 = np.empty(w, np.float64)
    row2 = np.empty(w, np.float64)
    half = 0.5 * w
    for j in range(v1.size):
        i1 = int(math.ceil(v1[j] - half))
        i2 = int(math.ceil(v2[j] - half))
        _kernel_row(v1[j], w, beta, i1, row1)
        _kernel_row(v2[j], w, beta, i2, row2)
        cj = c[j]
        s1 = i1 - off1
        s2 = i2 - off2
        for b in range(w):
            t2 = cj * row2[b]
            for a in range(w):
                buf[s2 + b, s1 + a] += t2 * row1[a]


@njit(**JIT_OPTS)
def spread_local_3d(v1, v2, v3, c, w, beta, off1, off2, off3, buf):
    row1 = np.empty(w, np.float64)
    row2 = np.empty(w, np.float64)
    row3 = np.empty(w, np.float64)
    half = 0.5 * w
    for j in range(v1.size):
        i1 = int(math.ceil(v1[j] - half))
        i2 = int(math.ceil(v2[j] - half))
        i3 = int(math.ceil(v3[j] - half))
        _kernel_row(v1[j], w, beta, i1, row1)
        _kernel_row(v2[j], w, beta, i2, row2)
        _kernel_row(v3[j], w, beta, i3, row3)
        cj = c[j]
        s1 = i1 - off1
        s2 = i2 - off2
        s3 = i3 - off3
        for e in range(w):
            t3 = cj * row3[e]
            for b in range(w):
                t2 = t3 * row2[b]
                for a in range(w):
                    buf[s3 + e, s2 + b, s1 + a] += t2 * row1[a]


@njit(**JIT_OPTS)
def merge_wrap_2d(buf, off1, off2, out):
    """Add a padded-bin buffer into the grid with periodic index wrap."""
    n2, n1 = out.shape
    p2, p1 = buf.shape
    for s2 in range(p2):
        l2 = (off2 + s2) % n2
        for s1 in range(p1):
            out[l2, (off1 + s1) % n1] += buf[s2, s1]


@njit(**JIT_OPTS)
def merge_wrap_3d(buf, off1, off2, off3, out):
    n3, n2, n1 = out.shape
    p3, p2, p1 = buf.shape
    for s3 in range(p3):
        l3 = (off3 + s3) % n3
        for s2 in range(p2):
            l2 = (off2 + s2) % n2
            for s1 in range(p1):
                out[l3, l2, (off1 + s1) % n1] += buf[s3, s2, s1]


@njit(**JIT_OPTS)
def interp_2d(v1, v2, w, beta, grid, out):
    n2, n1 = grid.shape
    row1 = np.empty(w, np.float64)
    row2 = np.empty(w, np.float64)
    half = 0.5 * w
    for j in range(v1.size):
        i1 = int(math.ceil(v1[j] - half))
        i2 = int(math.ceil(v2[j] - half))
        _kernel_row(v1[j], w, beta, i1, row1)
        _kernel_row(v2[j], w, beta, i2, row2)
        acc = 0.0j
        for b in range(w):
            l2 = (i2 + b) % n2
            inner = 0.0j
            for a in range(w):
                l1 = (i1 + a) % n1
                inner += grid[l2, l1] * row1[a]
            acc += inner * row2[b]
        out[j] = acc


@njit(**JIT_OPTS)
def interp_3d(v1, v2, v3, w, beta, grid, out):
    n3, n2, n1 = grid.shape
    row1 = np.empty(w, np.float64)
    row2 = np.empty(w, np.float64)
    row3 = np.empty(w, np.float64)
    half = 0.5 * w
    for j in range(v1.size):
        i1 = int(math.ceil(v1[j] - half))
        i2 = int(math.ceil(v2[j] - half))
        i3 = int(math.ceil(v3[j] - half))
        _kernel_row(v1[j], w, beta, i1, row1)
        _kernel_row(v2[j], w, beta, i2, row2)
        _kernel_row(v3[j], w, beta, i3, row3)
        acc = 0.0j
        for e in range(w):
            l3 = (i3 + e) % n3
            mid = 0.0j
            for b in range(w):
                l2 = (i2 + b) % n2
                inner = 0.0j
                for a in range(w):
                    l1 = (i1 + a) % n1
                    inner += grid[l3, l2, l1] * row1[a]
                mid += inner * row2[b]
            acc += mid * row3[e]
        out[j] = acc
