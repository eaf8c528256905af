import logging
import os
from concurrent.futures import ProcessPoolExecutor

log = logging.getLogger(__name__)

WORKERS_ENV = 'MIXLAB_WORKERS'


def resolve_workers(flag=None, configured=None):
    """ --workers beats the config key, which beats $MIXLAB_WORKERS; default 1. """
    for value in (flag, configured, os.environ.get(WORKERS_ENV)):
        if value is None or value == '':
            continue
        try:
            workers = int(value)
        except (TypeError, ValueError):
            raise ValueError('invalid worker count {!r}'.format(value))
        if workers < 1:
            raise ValueError('worker count must be >= 1')
        return workers
    return 1


def map_ordered(func, jobs, workers=1):
    """
    Apply a top-level *func* to every job and return the results in job order.

    With more than one worker the jobs run on a process pool; jobs and results
    must then be picklable.
    """
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]

    log.debug('running %d jobs on %d workers', len(jobs), workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, jobs))
