import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import mlnpde.customlogger as log

WORKERS = int(os.getenv('MLNPDE_WORKERS', '1'))

T = TypeVar('T')
R = TypeVar('R')

_logger = log.get_logger('driver')


def fan_out(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Map ``fn`` over ``items``; results come back in input order."""
    items = list(items)
    workers = WORKERS if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    _logger.debug('Fanning %d tasks out to %d workers', len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
