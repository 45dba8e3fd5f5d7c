import numpy as np


class Factor(object):
    """
    Factorization of a symmetric positive definite matrix.

    Backends wrap their native factor object; ``solve`` accepts a vector or
    an ``(n, k)`` block of right-hand sides.
    """

    def __init__(self, native, n, backend_name):
        self.native = native
        self.n = n
        self.backend_name = backend_name

    def _solve(self, b):
        raise NotImplementedError()  # Abstract

    def solve(self, b):
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.n:
            raise ValueError(
                "right-hand side has %d rows, factor is %d x %d" % (b.shape[0], self.n, self.n)
            )
        return np.asarray(self._solve(b)).reshape(b.shape)
