import logging

import scipy.sparse as sp
from sksparse.cholmod import CholmodNotPositiveDefiniteError, cholesky

from ..exceptions import IndefinitePreconditionerError
from ._common import Factor

log = logging.getLogger(__name__)


class CholmodFactor(Factor):
    def _solve(self, b):
        return self.native(b)


class CholmodBackend:
    """
    Supernodal sparse Cholesky from scikit-sparse, with CHOLMOD's own
    fill-reducing ordering.
    """

    name = "cholmod"

    def __init__(self, ordering_method="default"):
        self.ordering_method = ordering_method

    def factorize(self, matrix):
        matrix = sp.csc_matrix(matrix)
        try:
            factor = cholesky(matrix, ordering_method=self.ordering_method)
        except CholmodNotPositiveDefiniteError as e:
            raise IndefinitePreconditionerError("CHOLMOD: %s" % e)
        log.debug("CHOLMOD factor: n=%d", matrix.shape[0])
        return CholmodFactor(factor, matrix.shape[0], self.name)
