import concurrent.futures
import logging
from typing import Any, Callable, Iterable, List

import config

logger = logging.getLogger(__name__)


class SweepExecutor:
    """Thread pool for sweep points; results come back in submission order."""

    def __init__(self, max_workers: int | None = None) -> None:
        self.workers = max_workers or config.settings.workers
        self._pool = concurrent.futures.ThreadPoolExecutor(max_workers=self.workers)

    def submit(self, fn: Callable[..., Any], *args, **kwargs) -> concurrent.futures.Future:
        return self._pool.submit(fn, *args, **kwargs)

    def map_ordered(self, fn: Callable[[Any], Any], items: Iterable[Any]) -> List[Any]:
        futures = [self._pool.submit(fn, item) for item in items]
        logger.debug("submitted %d sweep points to %d workers", len(futures), self.workers)
        return [f.result() for f in futures]

    def shutdown(self, wait: bool = True) -> None:
        self._pool.shutdown(wait=wait)

    def __enter__(self) -> "SweepExecutor":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown(wait=True)
