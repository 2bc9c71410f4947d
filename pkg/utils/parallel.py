import asyncio
import logging
from typing import Callable, Iterable, TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


async def _gather(fn: Callable[[T], R], items: list[T], workers: int, bar: tqdm | None) -> list[R]:
    semaphore = asyncio.Semaphore(workers)

    async def run_one(item: T) -> R:
        async with semaphore:
            result = await asyncio.to_thread(fn, item)
            if bar is not None:
                bar.update(1)
            return result

    return await asyncio.gather(*(run_one(item) for item in items))


def map_chunks(
    fn: Callable[[T], R],
    items: Iterable[T],
    workers: int = 1,
    progress: bool = False,
    desc: str = "chunks",
) -> list[R]:
    """Apply fn to every work unit; results come back in input order."""
    items = list(items)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    bar = tqdm(total=len(items), desc=desc, leave=False) if progress else None
    try:
        if workers == 1 or len(items) <= 1:
            results = []
            for item in items:
                results.append(fn(item))
                if bar is not None:
                    bar.update(1)
            return results
        logger.debug("Running %d %s on %d workers", len(items), desc, workers)
        return asyncio.run(_gather(fn, items, workers, bar))
    finally:
        if bar is not None:
            bar.close()


def chunk_ranges(total: int, size: int) -> list[tuple[int, int, int]]:
    """(chunk index, start, stop) triples covering range(total)."""
    return [(i, start, min(start + size, total)) for i, start in enumerate(range(0, total, size))]
