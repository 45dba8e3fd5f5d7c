from __future__ import absolute_import

import logging
import os
from concurrent.futures import ThreadPoolExecutor

from ..exceptions import InvalidOptionError

log = logging.getLogger(__name__)

THREADS_ENV = "SAEM_THREADS"

# Below this many faces the pool overhead dominates.
_MIN_FACES_PER_CHUNK = 4096


def thread_count(environ=None):
    """ Number of worker threads allowed for face-parallel sums.

    Read from ``SAEM_THREADS``; unset or empty means 1.

    :raises saem.exceptions.InvalidOptionError: if the value is not a
        positive integer.
    """
    environ = os.environ if environ is None else environ
    value = environ.get(THREADS_ENV, "").strip()
    if not value:
        return 1
    try:
        count = int(value)
    except ValueError:
        raise InvalidOptionError(
            "%s was %r, but it must be a positive integer." % (THREADS_ENV, value)
        )
    if count < 1:
        raise InvalidOptionError(
            "%s was %d, but it must be a positive integer." % (THREADS_ENV, count)
        )
    return count


def face_sum(per_face, m, threads=None):
    """ Sum ``per_face(start, stop)`` over face ranges covering ``range(m)``.

    With one thread this is a single call. With more, the faces are split
    into contiguous chunks evaluated on a pool and the partial sums are
    added in chunk order, so the result only depends on the thread count.
    """
    if threads is None:
        threads = thread_count()
    if threads <= 1 or m < 2 * _MIN_FACES_PER_CHUNK:
        return per_face(0, m)

    n_chunks = min(threads, m // _MIN_FACES_PER_CHUNK)
    bounds = [m * i // n_chunks for i in range(n_chunks + 1)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        partials = list(
            pool.map(lambda i: per_face(bounds[i], bounds[i + 1]), range(n_chunks))
        )
    total = partials[0]
    for partial in partials[1:]:
        total = total + partial
    return total
