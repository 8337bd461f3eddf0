"""Optional thread parallelism, capped by the TSL_NUM_THREADS environment variable."""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_cap() -> int:
    """Worker count from TSL_NUM_THREADS; defaults to 1 (sequential)."""
    raw = os.environ.get("TSL_NUM_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items: list) -> list:
    """Order-preserving map, threaded only when the cap allows it."""
    cap = min(worker_cap(), len(items)) if items else 1
    if cap <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        return list(pool.map(fn, items))
