"""Spatial bin sorting of nonuniform points over the fine grid.

The fine grid is tiled into rectangular bins (default 32x32 cells in 2D,
16x16x2 in 3D).  Points are keyed by the bin containing their rounded
fine-grid cell and ordered by a stable counting sort, producing the
permutation used by the sorted spreading/interpolation paths.  Bins are
further split into load-capped subproblems for the blocked (local buffer)
spreading method.

Grid-frame convention used throughout the library: a point x in
[-pi, pi) has fine-grid coordinate v = (x + pi) / h in [0, n), so cell
l of the grid sits at spatial position -pi + l*h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BinLayout",
    "SubproblemSet",
    "default_bin_dims",
    "grid_coords",
    "bin_index",
    "bin_sort",
    "build_subproblems",
]

TWO_PI = 2.0 * np.pi

# Bin edge lengths in fine-grid cells (axis 1 first).
DEFAULT_BIN_DIMS_2D = (32, 32)
DEFAULT_BIN_DIMS_3D = (16, 16, 2)

# Load cap: maximum points per subproblem.
DEFAULT_MAX_SUBPROBLEM = 1024


def default_bin_dims(dim: int) -> tuple[int, ...]:
    return DEFAULT_BIN_DIMS_2D if dim == 2 else DEFAULT_BIN_DIMS_3D


@dataclass(frozen=True)
class BinLayout:
    """Bin geometry plus the bin-sorted point permutation.

    ``perm`` maps sorted position to original point index: positions
    ``starts[i]:starts[i+1]`` list, in input order, exactly the points
    whose rounded fine-grid cell lies in bin ``i``.
    """

    fine: tuple[int, ...]
    bin_dims: tuple[int, ...]
    bins_per_axis: tuple[int, ...]
    nbins: int
    point_bins: np.ndarray  # (M,) int64, bin key per original point
    counts: np.ndarray      # (nbins,) int64
    starts: np.ndarray      # (nbins + 1,) int64, exclusive prefix sums
    perm: np.ndarray        # (M,) int64

    @property
    def num_points(self) -> int:
        return self.perm.size


@dataclass(frozen=True)
class SubproblemSet:
    """Load-capped slices of the bin-sorted point order.

    Each subproblem owns a contiguous slice ``perm[start:stop]`` of one
    bin's points (at most ``max_size`` of them) and a padded bin whose
    corner ``offsets`` and dims ``padded_dims`` (axis 1 first) enclose
    every kernel footprint of its points.  Offsets may be negative or
    reach past the grid; wrapping happens when buffers are merged.
    """

    max_size: int
    halo: int
    bin_ids: np.ndarray      # (S,) int64
    slice_starts: np.ndarray  # (S,) int64
    slice_stops: np.ndarray   # (S,) int64
    offsets: np.ndarray       # (S, d) int64
    padded_dims: np.ndarray   # (S, d) int64

    def __len__(self) -> int:
        return self.bin_ids.size


def grid_coords(points, fine: tuple[int, ...]) -> np.ndarray:
    """Fine-grid frame coordinates v_i = (x_i + pi)/h_i in [0, n_i].

    Points are reduced mod 2*pi first, so any finite coordinates are
    accepted.  The upper endpoint n_i can be hit through rounding at the
    periodic seam; consumers treat v = n_i the same as v = 0.
    """
    pts = np.asarray(points, dtype=np.float64)
    scale = np.asarray(fine, dtype=np.float64) / TWO_PI  # 1/h_i
    return np.remainder(pts + np.pi, TWO_PI) * scale


def _bins_from_cells(cells: np.ndarray, layout_dims, bins_per_axis) -> np.ndarray:
    """Flatten per-axis bin coordinates, axis 1 fastest."""
    d = cells.shape[1]
    keys = cells[:, 0] // layout_dims[0]
    stride = bins_per_axis[0]
    for i in range(1, d):
        keys = keys + stride * (cells[:, i] // layout_dims[i])
        stride *= bins_per_axis[i]
    return keys


def bin_index(points, grid, layout_dims=None):
    """Bin key(s) of folded point(s): floor((x+pi)/h) per axis, clamped
    to the grid, then flattened with the axis-1 bin coordinate fastest.

    Accepts one point of shape (d,) or many of shape (M, d); returns an
    int or an int64 array accordingly.
    """
    if layout_dims is None:
        layout_dims = default_bin_dims(grid.dim)
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    v = grid_coords(np.atleast_2d(pts), grid.fine)
    fine = np.asarray(grid.fine, dtype=np.int64)
    cells = np.minimum(np.floor(v).astype(np.int64), fine - 1)
    np.maximum(cells, 0, out=cells)
    nb = tuple(-(-n // m) for n, m in zip(grid.fine, layout_dims))
    keys = _bins_from_cells(cells, layout_dims, nb)
    return int(keys[0]) if single else keys


def bin_sort(points, grid, layout_dims=None) -> BinLayout:
    """Stable counting sort of points by bin.

    Histogram of bin keys, exclusive prefix sum, then a stable scatter of
    point indices; within a bin the original input order is preserved.
    """
    if layout_dims is None:
        layout_dims = default_bin_dims(grid.dim)
    layout_dims = tuple(int(m) for m in layout_dims)
    if len(layout_dims) != grid.dim or any(m < 1 for m in layout_dims):
        raise ValueError(f"invalid bin dims {layout_dims} for dim {grid.dim}")
    nb = tuple(-(-n // m) for n, m in zip(grid.fine, layout_dims))
    nbins = int(np.prod(nb))
    keys = bin_index(points, grid, layout_dims)
    keys = np.atleast_1d(keys)
    counts = np.bincount(keys, minlength=nbins).astype(np.int64)
    starts = np.zeros(nbins + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    # stable argsort over integer keys == counting-sort scatter
    perm = np.argsort(keys, kind="stable").astype(np.int64)
    return BinLayout(
        fine=tuple(grid.fine),
        bin_dims=layout_dims,
        bins_per_axis=nb,
        nbins=nbins,
        point_bins=keys,
        counts=counts,
        starts=starts,
        perm=perm,
    )


def build_subproblems(layout: BinLayout, params,
                      max_size: int = DEFAULT_MAX_SUBPROBLEM) -> SubproblemSet:
    """Split each nonempty bin into slices of at most ``max_size`` points.

    The padded bin of every subproblem extends ceil(w/2) cells beyond its
    bin on all sides; boundary bins keep their (smaller) actual dims.
    """
    max_size = int(max_size)
    if max_size < 1:
        raise ValueError(f"max subproblem size must be >= 1, got {max_size}")
    halo = params.halo
    d = len(layout.fine)
    nb = layout.bins_per_axis
    m = layout.bin_dims
    fine = layout.fine

    nonempty = np.nonzero(layout.counts)[0]
    nsub_per_bin = -(-layout.counts[nonempty] // max_size)
    total = int(nsub_per_bin.sum())

    bin_ids = np.empty(total, dtype=np.int64)
    slice_starts = np.empty(total, dtype=np.int64)
    slice_stops = np.empty(total, dtype=np.int64)
    offsets = np.empty((total, d), dtype=np.int64)
    padded_dims = np.empty((total, d), dtype=np.int64)

    pos = 0
    for b, reps in zip(nonempty.tolist(), nsub_per_bin.tolist()):
        rem = b
        corner = np.empty(d, dtype=np.int64)
        actual = np.empty(d, dtype=np.int64)
        for i in range(d):
            corner[i] = (rem % nb[i]) * m[i]
            rem //= nb[i]
            actual[i] = min(m[i], fine[i] - corner[i])
        lo = int(layout.starts[b])
        hi = int(layout.starts[b + 1])
        for r in range(reps):
            bin_ids[pos] = b
            slice_starts[pos] = lo + r * max_size
            slice_stops[pos] = min(lo + (r + 1) * max_size, hi)
            offsets[pos] = corner - halo
            padded_dims[pos] = actual + 2 * halo
            pos += 1

    return SubproblemSet(
        max_size=max_size,
        halo=halo,
        bin_ids=bin_ids,
        slice_starts=slice_starts,
        slice_stops=slice_stops,
        offsets=offsets,
        padded_dims=padded_dims,
    )
