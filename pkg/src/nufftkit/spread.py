"""Spreading of weighted nonuniform points onto the fine grid.

Three strategies with identical results up to summation order:

* ``gm``      visit points in input order, accumulate into the grid;
* ``gmsort``  same accumulation, visiting in bin-sorted order;
* ``sm``      per-subproblem accumulation into small padded-bin buffers,
              merged into the grid with periodic wrap.

Multi-worker runs split points (or subproblems) across a thread pool and
merge partial results in a fixed order, so outputs are reproducible
bit-for-bit for a given plan configuration.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from ._parallel import SERIAL_CUTOFF, chunk_bounds, ordered_map
from .binsort import grid_coords

__all__ = ["spread_point", "spread_gm", "spread_gm_sort", "spread_sm"]

# Cap on combined size of per-worker private grids in the chunked paths.
PRIVATE_GRID_BUDGET = 1 << 30


def _coord_rows(points, fine):
    v = grid_coords(points, fine)
    return tuple(np.ascontiguousarray(v[:, i]) for i in range(v.shape[1]))


def _spread_serial(vrows, c, w, beta, out):
    if len(vrows) == 2:
        _kernels.spread_2d(vrows[0], vrows[1], c, w, beta, out)
    else:
        _kernels.spread_3d(vrows[0], vrows[1], vrows[2], c, w, beta, out)


def _spread_local(vrows, c, w, beta, offsets, buf):
    if len(vrows) == 2:
        _kernels.spread_local_2d(
            vrows[0], vrows[1], c, w, beta, offsets[0], offsets[1], buf
        )
    else:
        _kernels.spread_local_3d(
            vrows[0], vrows[1], vrows[2], c, w, beta,
            offsets[0], offsets[1], offsets[2], buf,
        )


def _merge_wrap(buf, offsets, out):
    if out.ndim == 2:
        _kernels.merge_wrap_2d(buf, offsets[0], offsets[1], out)
    else:
        _kernels.merge_wrap_3d(buf, offsets[0], offsets[1], offsets[2], out)


def _effective_workers(workers, nbytes, npoints):
    if npoints < SERIAL_CUTOFF:
        return 1
    fit = max(1, int(PRIVATE_GRID_BUDGET // max(nbytes, 1)))
    return max(1, min(workers, fit))


def _spread_chunked(vrows, c, params, out, workers):
    """Accumulate all points into ``out``; parallel over point chunks.

    Each worker spreads its contiguous chunk into a private grid; the
    private grids are added into ``out`` in worker order.
    """
    m = c.size
    eff = _effective_workers(workers, out.nbytes, m)
    if eff <= 1:
        _spread_serial(vrows, c, params.w, params.beta, out)
        return
    bounds = chunk_bounds(m, eff)

    def task(span):
        lo, hi = span
        part = np.zeros_like(out)
        _spread_serial(
            tuple(r[lo:hi] for r in vrows), c[lo:hi],
            params.w, params.beta, part,
        )
        return part

    for part in ordered_map(task, bounds, eff, window=len(bounds)):
        out += part


def _spread_blocked(vrows_sorted, c_sorted, subs, params, out, workers):
    """Per-subproblem padded-bin accumulation, merged in index order."""
    w, beta = params.w, params.beta
    buf_shape_of = lambda k: tuple(int(p) for p in subs.padded_dims[k][::-1])

    def task(k):
        lo = int(subs.slice_starts[k])
        hi = int(subs.slice_stops[k])
        buf = np.zeros(buf_shape_of(k), dtype=out.dtype)
        offs = subs.offsets[k]
        _spread_local(
            tuple(r[lo:hi] for r in vrows_sorted), c_sorted[lo:hi],
            w, beta, offs, buf,
        )
        return buf, offs

    eff = 1 if c_sorted.size < SERIAL_CUTOFF else max(1, workers)
    for buf, offs in ordered_map(task, range(len(subs)), eff):
        _merge_wrap(buf, offs, out)


def spread_point(point, strength, params, grid, target, offsets=None):
    """Spread one weighted point into ``target``.

    With ``offsets`` None the target is a global fine grid and footprint
    indices wrap mod n_i; otherwise it is a padded-bin buffer indexed
    locally by s_i = l_i - offsets_i without wrapping.
    """
    pts = np.asarray(point, dtype=np.float64).reshape(1, -1)
    vrows = _coord_rows(pts, grid.fine)
    c = np.asarray([strength], dtype=target.dtype)
    if offsets is None:
        _spread_serial(vrows, c, params.w, params.beta, target)
    else:
        offs = np.asarray(offsets, dtype=np.int64)
        _spread_local(vrows, c, params.w, params.beta, offs, target)


def _new_grid(grid, params):
    return np.zeros(grid.fine_shape, dtype=params.complex_dtype)


def _as_strengths(strengths, m, dtype):
    c = np.ascontiguousarray(strengths, dtype=dtype).reshape(-1)
    if c.size != m:
        raise ValueError(f"expected {m} strengths, got {c.size}")
    return c


def spread_gm(points, strengths, params, grid, workers: int = 1):
    """Spread in user-supplied point order (unsorted baseline)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, grid.dim)
    vrows = _coord_rows(pts, grid.fine)
    c = _as_strengths(strengths, pts.shape[0], params.complex_dtype)
    out = _new_grid(grid, params)
    _spread_chunked(vrows, c, params, out, workers)
    return out


def spread_gm_sort(points, layout, strengths, params, grid, workers: int = 1):
    """Spread visiting points in bin-sorted order (same sum, new order)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, grid.dim)
    if layout.num_points != pts.shape[0] or tuple(layout.fine) != tuple(grid.fine):
        raise ValueError("bin layout does not match the supplied points/grid")
    c = _as_strengths(strengths, pts.shape[0], params.complex_dtype)
    vrows = _coord_rows(pts, grid.fine)
    perm = layout.perm
    vrows = tuple(np.ascontiguousarray(r[perm]) for r in vrows)
    out = _new_grid(grid, params)
    _spread_chunked(vrows, c[perm], params, out, workers)
    return out


def spread_sm(points, layout, subproblems, strengths, params, grid,
              workers: int = 1):
    """Blocked spreading: padded-bin buffers per subproblem, then merge."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, grid.dim)
    m = pts.shape[0]
    if layout.num_points != m or tuple(layout.fine) != tuple(grid.fine):
        raise ValueError("bin layout does not match the supplied points/grid")
    sizes = subproblems.slice_stops - subproblems.slice_starts
    if int(sizes.sum()) != m:
        raise ValueError("subproblem slices do not partition the point set")
    c = _as_strengths(strengths, m, params.complex_dtype)
    vrows = _coord_rows(pts, grid.fine)
    perm = layout.perm
    vrows = tuple(np.ascontiguousarray(r[perm]) for r in vrows)
    out = _new_grid(grid, params)
    _spread_blocked(vrows, c[perm], subproblems, params, out, workers)
    return out
