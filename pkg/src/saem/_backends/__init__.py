from ._common import Factor

__all__ = ["Factor"]
