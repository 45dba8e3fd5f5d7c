"""
saem - Bijective area-preserving spherical parameterization of genus-zero meshes.
"""
from __future__ import absolute_import
import warnings

from . import exceptions
from .mesh import TriMesh, load_mesh, save_mesh, normalize_area
from .sphere import (
    SphericalMap,
    SphericalCoords,
    to_spherical,
    from_spherical,
    detect_foldings,
    load_map,
    save_map,
)
from .energy import evaluate_energies
from .initializer import InitOptions, initial_spherical_map, fixed_point_warmup
from .solver import SolverOptions, minimize
from .correction import CorrectionOptions, correct_foldings
from .report import build_report
from .backends import Backend


# Set default logging handler to avoid "No handler found" warnings.
import logging
from logging import NullHandler

__license__ = "MIT"
__version__ = "0.1.0"

__all__ = [
    "Backend",
    "CorrectionOptions",
    "InitOptions",
    "SolverOptions",
    "SphericalCoords",
    "SphericalMap",
    "TriMesh",
    "add_stderr_logger",
    "build_report",
    "correct_foldings",
    "detect_foldings",
    "disable_warnings",
    "evaluate_energies",
    "fixed_point_warmup",
    "from_spherical",
    "initial_spherical_map",
    "load_map",
    "load_mesh",
    "minimize",
    "normalize_area",
    "save_map",
    "save_mesh",
    "to_spherical",
]


logging.getLogger(__name__).addHandler(NullHandler())


def add_stderr_logger(level=logging.DEBUG):
    """
    Helper for quickly adding a StreamHandler to the logger. Useful for
    following a long solve.

    Returns the handler after adding it.
    """
    # This method needs to be in this __init__.py to get the __name__ correct.
    logger = logging.getLogger(__name__)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.debug("Added a stderr logging handler to logger: %s", __name__)
    return handler


# ... Clean up.
del NullHandler


# All warning filters *must* be appended so users can still silence them.
warnings.simplefilter("default", exceptions.ResidualFoldWarning, append=True)
warnings.simplefilter("default", exceptions.PreconditionerFallbackWarning, append=True)
warnings.simplefilter("default", exceptions.LineSearchWarning, append=True)
warnings.simplefilter("default", exceptions.FaceAdjacencyWarning, append=True)


def disable_warnings(category=exceptions.SAEMWarning):
    """
    Helper for quickly disabling all saem warnings.
    """
    warnings.simplefilter("ignore", category)
