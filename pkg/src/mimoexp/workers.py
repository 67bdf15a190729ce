"""Worker-count policy shared by the parallel code paths."""

from concurrent.futures import ThreadPoolExecutor
import os

from .errors import ValidationError

ENV_VAR = "MIMOEXP_THREADS"


def worker_count(requested=None):
    """Number of workers to use.

    ``requested`` wins when given; otherwise ``MIMOEXP_THREADS`` caps the
    CPU count.  Always at least 1.
    """
    cpus = os.cpu_count() or 1
    if requested is not None:
        if int(requested) < 1:
            raise ValidationError("worker count must be >= 1")
        return int(requested)
    raw = os.environ.get(ENV_VAR)
    if raw is None or raw.strip() == "":
        return cpus
    try:
        cap = int(raw)
    except ValueError:
        raise ValidationError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValidationError(f"{ENV_VAR} must be >= 1, got {cap}")
    return min(cap, cpus)


def ordered_map(fn, items, workers=None):
    """``[fn(x) for x in items]``, possibly on a thread pool; order is kept."""
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
