import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "CHEEGERLAB_THREADS"


def thread_count():
    """Worker cap from ``CHEEGERLAB_THREADS``; defaults to all cores."""
    raw = os.environ.get(ENV_THREADS, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n > 0:
            return n
    return os.cpu_count() or 1


def ordered_map(fn, items):
    """Map ``fn`` over ``items``; results keep input order whatever the thread count."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
