# /src/utils/parallel_utils.py

"""
Parallel Utilities Module

This module runs independent per-scan or per-sequence work on a process pool.
Results always come back in input order, so reductions over them are identical
to a serial run.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from constant import WORKERS_ENV_VAR

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(requested: Optional[int] = None) -> int:
    """
    Worker count: the explicit request, else the environment variable, else 1.

    Args:
        requested: Value of the --parallelism flag, if given

    Returns:
        Number of worker processes (>= 1)
    """
    if requested is not None:
        if requested < 1:
            raise ValueError(f"parallelism must be >= 1, got {requested}")
        return requested
    value = os.getenv(WORKERS_ENV_VAR)
    if not value:
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV_VAR} must be an integer, got '{value}'") from None
    if workers < 1:
        raise ValueError(f"{WORKERS_ENV_VAR} must be >= 1, got {workers}")
    return workers


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    Apply `func` to every item, in parallel when workers > 1.

    Args:
        func: Picklable top-level function
        items: Work items
        workers: Number of worker processes

    Returns:
        Results in input order
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug(f"Dispatching {len(items)} work items to {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
