from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
import logging
from typing import Callable, Iterable, Iterator, List, TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class InlineExecutor:
    """Runs tasks in the calling process; same `map` contract as a pool."""

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> Iterator[R]:
        return map(fn, items)

    def shutdown(self, wait: bool = True) -> None:
        pass


@contextmanager
def get_executor(jobs: int = 1):
    """
    Per-image worker pool. `map` always yields results in input order,
    so output is identical for every value of `jobs`.
    """
    if jobs <= 1:
        executor = InlineExecutor()
    else:
        logger.debug("starting process pool with %d workers", jobs)
        executor = ProcessPoolExecutor(max_workers=jobs)
    try:
        yield executor
    finally:
        executor.shutdown(wait=True)


def map_ordered(fn: Callable[[T], R], items: List[T], jobs: int = 1, desc: str = "") -> List[R]:
    with get_executor(jobs) as executor:
        results = executor.map(fn, items)
        return list(tqdm(results, total=len(items), desc=desc, disable=None, leave=False))
