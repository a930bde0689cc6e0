import logging
import typing
from multiprocessing import Pool

_LOGGER = logging.getLogger(__name__)

TaskT = typing.TypeVar("TaskT")
ResultT = typing.TypeVar("ResultT")


def ordered_map(
    fn: typing.Callable[[TaskT], ResultT], tasks: typing.Sequence[TaskT], jobs: int = 1
) -> typing.Iterator[ResultT]:
    """
    Yields fn(task) in task order whatever the completion order. jobs > 1 runs tasks in a process
    pool; fn must then be a module-level function and tasks picklable.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")
    if jobs == 1 or len(tasks) <= 1:
        for task in tasks:
            yield fn(task)
        return

    workers = min(jobs, len(tasks))
    _LOGGER.info(f"Dispatching {len(tasks)} runs to {workers} workers")
    with Pool(workers) as pool:
        yield from pool.imap(fn, tasks)
