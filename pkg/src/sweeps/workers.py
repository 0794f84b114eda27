import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from dotenv import load_dotenv

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """
    Worker count: the explicit value, else CASIMECH_THREADS, else 1

    Example:
        >>> resolve_threads(4)
        4
    """
    if threads is None:
        load_dotenv()
        raw = os.getenv("CASIMECH_THREADS")
        if raw is None or raw.strip() == "":
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(f"must be an integer, got {raw!r}", field="CASIMECH_THREADS")
    if threads < 1:
        raise ConfigError(f"must be >= 1, got {threads}", field="threads")
    return threads


def run_parallel(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """
    Map func over items, in a process pool when threads > 1

    Results come back in input order whatever the completion order, so
    the tables built from them are identical for any worker count. func
    must be a module-level function and items must be picklable.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.info("dispatching %d sweep points to %d workers", len(items), threads)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * threads))))
