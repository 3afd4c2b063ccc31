"""Per-field work distribution."""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_fields(func: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """Apply func to every item, in a process pool when workers > 1; results keep input order.

    func must be picklable (a module-level function or a functools.partial of one).
    """
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug("Distributing %d work items over %d processes", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
