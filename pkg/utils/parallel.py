import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREAD_COUNT:int = os.cpu_count() or 1

def set_thread_count(count:int|None) -> None:
    """
    Set the number of worker threads used for the per-column work (None resets to all cores)
    """
    global THREAD_COUNT
    if count is not None and count < 1:
        raise ValueError(f"Thread count must be at least 1, got {count}")
    THREAD_COUNT = count if count is not None else (os.cpu_count() or 1)

def get_thread_count() -> int:
    return THREAD_COUNT

def parallel_map(func:Callable[[T], R], items:Iterable[T], min_items:int = 2) -> list[R]:
    """
    Apply func to every item, fanning out across the worker threads.
    Results are always returned in input order.
    """
    items = list(items)
    workers = min(THREAD_COUNT, len(items))
    if workers <= 1 or len(items) < min_items:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
