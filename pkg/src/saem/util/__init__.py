from __future__ import absolute_import

from .timer import Timer, StageTimings, TimerStateError, current_time
from .threads import thread_count, face_sum

__all__ = (
    "StageTimings",
    "Timer",
    "TimerStateError",
    "current_time",
    "face_sum",
    "thread_count",
)
