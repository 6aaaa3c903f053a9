# Worker-count discovery and an order-preserving parallel map.
import os
from multiprocessing import Pool
from typing import Callable, Iterable, List

THREADS_ENV = 'HETNET_THREADS'


def visible_threads() -> int:
    """
    Returns the number of worker processes we are allowed to use.
    HETNET_THREADS caps it; without it we take every core.
    """
    if THREADS_ENV not in os.environ:
        return os.cpu_count() or 1

    value = os.environ[THREADS_ENV].strip()
    try:
        threads = int(value)
    except ValueError:
        print('Warning: ignoring %s=%r, expected a positive integer.' % (THREADS_ENV, value))
        return os.cpu_count() or 1

    return max(threads, 1)


def parallel_map(fn:Callable, items:Iterable, threads:int=None, callback:Callable=None) -> List:
    """
    Same as list(map(fn, items)), but spread over a process pool.
    Results come back in input order no matter how many workers ran, so
    any reduction over them is deterministic. callback(i, result) is called in
    the parent after the i-th result arrives (used for progress bars).
    """
    items = list(items)
    if threads is None:
        threads = visible_threads()
    threads = min(threads, len(items))

    out = []
    if threads <= 1:
        for item in items:
            out.append(fn(item))
            if callback is not None: callback(len(out), out[-1])
        return out

    chunksize = max(1, len(items) // (threads * 8))
    with Pool(processes=threads) as pool:
        for res in pool.imap(fn, items, chunksize=chunksize):
            out.append(res)
            if callback is not None: callback(len(out), res)

    return out
