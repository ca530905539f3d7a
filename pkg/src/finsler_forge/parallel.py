"""Run independent evaluations in worker threads."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import anyio
import anyio.to_thread

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Sequence

logger: logging.Logger = logging.getLogger(__name__)


async def _gather[T, R](fn: Callable[[T], R], items: Sequence[T], threads: int) -> list[R]:
    limiter = anyio.CapacityLimiter(threads)
    results: dict[int, R] = {}
    failures: dict[int, BaseException] = {}

    async def run(index: int, item: T) -> None:
        try:
            results[index] = await anyio.to_thread.run_sync(fn, item, limiter=limiter)
        except Exception as e:  # noqa: BLE001
            failures[index] = e

    async with anyio.create_task_group() as tg:
        for index, item in enumerate(items):
            tg.start_soon(run, index, item)

    if failures:
        raise failures[min(failures)]
    return [results[index] for index in range(len(items))]


def map_threads[T, R](fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Apply ``fn`` to every item, in order, using up to ``threads`` worker threads.

    The first failing item (by position) has its exception re-raised unchanged.

    Returns:
        One result per item.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug("Mapping %d items over %d threads", len(items), threads)
    return anyio.run(_gather, fn, list(items), threads)
