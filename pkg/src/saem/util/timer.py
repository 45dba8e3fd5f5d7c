from __future__ import absolute_import

import time


class TimerStateError(RuntimeError):
    "Raised when a stage timer is used out of order."
    pass


# Use time.monotonic if available.
current_time = getattr(time, "monotonic", time.time)


class Timer(object):
    """ Wall-clock timer for one pipeline stage.

    Timers are single-use::

        timer = Timer("solve")
        timer.start()
        ...
        seconds = timer.stop()

    :param name:
        Stage name, used as the key when timings are collected into a report.
    """

    def __init__(self, name):
        self.name = name
        self._start = None
        self._stop = None

    def __repr__(self):
        return "%s(name=%r, elapsed=%r)" % (
            type(self).__name__,
            self.name,
            self._stop - self._start if self._stop is not None else None,
        )

    def start(self):
        """ Start the clock.

        :raises saem.util.timer.TimerStateError: if you attempt
            to start a timer that has been started already.
        """
        if self._start is not None:
            raise TimerStateError("Timer %r has already been started." % self.name)
        self._start = current_time()
        return self._start

    def stop(self):
        """ Stop the clock and return the elapsed seconds. """
        if self._start is None:
            raise TimerStateError("Can't stop timer %r that has not started." % self.name)
        if self._stop is None:
            self._stop = current_time()
        return self._stop - self._start

    @property
    def elapsed(self):
        """ Seconds since :meth:`start`, or the final duration once stopped.

        :rtype: float
        :raises saem.util.timer.TimerStateError: if you attempt
            to get the duration of a timer that hasn't been started.
        """
        if self._start is None:
            raise TimerStateError(
                "Can't get duration for timer %r that has not started." % self.name
            )
        end = self._stop if self._stop is not None else current_time()
        return end - self._start

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.stop()
        return False


class StageTimings(object):
    """ Ordered collection of :class:`Timer` results keyed by stage name. """

    def __init__(self):
        self._timers = []

    def stage(self, name):
        timer = Timer(name)
        self._timers.append(timer)
        return timer

    def as_dict(self):
        return dict((t.name, t.elapsed) for t in self._timers if t._start is not None)

    @property
    def total(self):
        return sum(self.as_dict().values())
