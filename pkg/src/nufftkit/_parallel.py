"""Worker-pool plumbing for the spreading/interpolation stages.

Parallel reductions here always merge partial results in a fixed order
(worker index for chunked paths, subproblem index for the blocked path),
so repeated executions are bit-identical regardless of thread timing.
"""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor

# Auto worker cap: beyond this, thread overhead and per-worker grid
# copies outweigh the gains at desk scale.
MAX_AUTO_WORKERS = 8

# Below this many points a serial pass beats pool startup.
SERIAL_CUTOFF = 20_000


def resolve_workers(requested: int) -> int:
    """Map the user worker count to an actual one (0 means auto)."""
    requested = int(requested)
    if requested < 0:
        raise ValueError(f"worker count must be >= 0, got {requested}")
    if requested == 0:
        return max(1, min(os.cpu_count() or 1, MAX_AUTO_WORKERS))
    return requested


def chunk_bounds(total: int, parts: int) -> list[tuple[int, int]]:
    """Split range(total) into <= parts contiguous, near-equal chunks."""
    parts = max(1, min(parts, total))
    step, extra = divmod(total, parts)
    bounds = []
    lo = 0
    for i in range(parts):
        hi = lo + step + (1 if i < extra else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def ordered_map(fn, items, workers: int, window: int | None = None):
    """Yield fn(item) in item order, computing up to ``window`` ahead.

    Tasks are pulled by pool workers as they free up (load balancing);
    results come back strictly in submission order so the caller can do
    order-sensitive accumulation.
    """
    if workers <= 1:
        for item in items:
            yield fn(item)
        return
    if window is None:
        window = 4 * workers
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending: deque = deque()
        it = iter(items)
        for item in it:
            pending.append(pool.submit(fn, item))
            if len(pending) >= window:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
