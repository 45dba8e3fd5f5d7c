import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..exceptions import IndefinitePreconditionerError
from ._common import Factor

log = logging.getLogger(__name__)

_SYMMETRY_TOLERANCE = 1e-8


class SuperLUFactor(Factor):
    def _solve(self, b):
        return self.native.solve(b)


class SuperLUBackend:
    """
    SciPy's SuperLU run as a symmetric factorization: symmetric ordering,
    diagonal pivots only. The matrix is positive definite exactly when the
    permutation stayed symmetric and every pivot is positive.
    """

    name = "superlu"

    def __init__(self, permc_spec="MMD_AT_PLUS_A"):
        self.permc_spec = permc_spec

    def factorize(self, matrix):
        matrix = sp.csc_matrix(matrix)
        n = matrix.shape[0]
        try:
            lu = splu(
                matrix,
                permc_spec=self.permc_spec,
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError as e:
            raise IndefinitePreconditionerError("SuperLU failed: %s" % e)

        pivots = lu.U.diagonal()
        if not np.all(pivots > 0):
            raise IndefinitePreconditionerError(
                "non-positive pivot %.3g in symmetric factorization" % pivots.min()
            )
        # A symmetric elimination has U = D Lᵀ; anything else pivoted off the diagonal.
        mismatch = abs(lu.L.dot(sp.diags(pivots)) - lu.U.T)
        if mismatch.nnz and mismatch.max() > _SYMMETRY_TOLERANCE * pivots.max():
            raise IndefinitePreconditionerError("SuperLU pivoted off the diagonal")
        log.debug("SuperLU factor: n=%d, nnz(L)=%d, nnz(U)=%d", n, lu.L.nnz, lu.U.nnz)
        return SuperLUFactor(lu, n, self.name)
