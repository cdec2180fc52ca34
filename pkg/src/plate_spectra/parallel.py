"""Deterministic parallel helpers gated by the PLATE_SPECTRA_THREADS env var."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "PLATE_SPECTRA_THREADS"
_MAX_THREADS = 64


def thread_count() -> int:
    """Thread cap from the environment; 1 when unset or malformed."""
    raw = os.environ.get(ENV_VAR, "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, min(n, _MAX_THREADS))


def run_tasks(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Apply fn to items, possibly on a thread pool.

    Results are returned in input order, so the outcome is independent of the
    thread count.
    """
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
