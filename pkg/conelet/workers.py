""" Functions to fan independent work out to a process pool
"""

import multiprocessing
import os

from tqdm import tqdm

from conelet.errors import ParameterError


THREADS_ENV = "CONELET_THREADS"


def thread_count(requested=None):
    """Number of worker processes to use

    The CONELET_THREADS environment variable wins over the requested value.

    Args:
        requested (int): value asked for on the command line, None for 1

    Returns:
        threads (int): at least 1

    Raises:
        ParameterError: if the value is not a positive integer
    """
    value = os.environ.get(THREADS_ENV)
    if value is None:
        value = 1 if requested is None else requested
    try:
        threads = int(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{THREADS_ENV} must be a positive integer, got {value!r}")
    if threads < 1:
        raise ParameterError(f"thread count must be >= 1, got {threads}")
    return threads


def pool_map(func, items, threads=1, progress=False, desc=None):
    """Ordered map over a process pool

    Results come back in input order whatever the worker count, so any
    reduction done on them afterwards is deterministic. One thread runs in
    process.

    Args:
        func (callable): picklable worker, usually a functools.partial
        items (iterable): work items
        threads (int): worker processes
        progress (bool): show a tqdm bar
        desc (str): label of the bar

    Returns:
        results (list)
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in tqdm(items, desc=desc, disable=not progress)]
    with multiprocessing.Pool(processes=min(threads, len(items))) as pool:
        return list(
            tqdm(pool.imap(func, items), total=len(items), desc=desc, disable=not progress)
        )
