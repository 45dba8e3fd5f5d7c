from __future__ import absolute_import

# Base Exceptions


class SAEMError(Exception):
    "Base exception used by this module."
    pass


class SAEMWarning(Warning):
    "Base warning used by this module."
    pass


class InvalidOptionError(SAEMError, ValueError):
    "Raised when an options object is constructed with an invalid value."
    pass


# Mesh input


class MeshError(SAEMError):
    "Base exception for meshes that cannot be used as a parameterization domain."
    pass


class MeshIOError(SAEMError, IOError):
    "Raised when a mesh or map file cannot be opened, read or written."

    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        SAEMError.__init__(self, "%s: %s" % (path, reason))

    def __reduce__(self):
        # For pickling purposes.
        return self.__class__, (self.path, self.reason)


class MeshParseError(MeshError, ValueError):
    """Raised when a mesh file does not parse as OBJ or OFF.

    :param path: The file being parsed, or None for in-memory text
    :param lineno: 1-based line number of the offending record, or None
    :param message: What went wrong
    """

    def __init__(self, path, lineno, message):
        self.path = path
        self.lineno = lineno
        self.message = message
        where = path if path is not None else "<string>"
        if lineno is not None:
            where = "%s:%d" % (where, lineno)
        MeshError.__init__(self, "%s: %s" % (where, message))

    def __reduce__(self):
        # For pickling purposes.
        return self.__class__, (self.path, self.lineno, self.message)


class InvalidMeshError(MeshError, ValueError):
    """Raised when a mesh violates a structural invariant.

    ``invariant`` names the violated rule (``"indices"``, ``"manifold"``,
    ``"closed"``, ``"orientation"``, ``"euler"``, ``"area"``, ...).
    """

    def __init__(self, invariant, message):
        self.invariant = invariant
        MeshError.__init__(self, message)

    def __reduce__(self):
        # For pickling purposes.
        return self.__class__, (self.invariant, str(self))


# Geometry


class DegenerateFaceError(SAEMError, ValueError):
    "Raised when a face has zero image area, a zero-length edge or a vanishing centre."
    pass


class CollapsedImageError(SAEMError, ValueError):
    "Raised when the image volume or area is too small for an energy to be defined."
    pass


class PointOutsideFaceError(SAEMError, ValueError):
    "Raised when a point handed to barycentric interpolation is not on the face."
    pass


class NotOnSphereError(SAEMError, ValueError):
    "Raised when spherical map points are not unit length."
    pass


class MapMismatchError(SAEMError, ValueError):
    "Raised when a spherical map does not belong to the mesh it is paired with."
    pass


# Numerics


class IndefinitePreconditionerError(SAEMError):
    "Raised when the pinned stretch Laplacian is not positive definite."
    pass


class SingularSystemError(SAEMError):
    "Raised when a local linear solve is numerically singular."
    pass


class NotDescentDirectionError(SAEMError, ValueError):
    "Raised when a line search is started along a non-descent direction."

    def __init__(self, slope):
        self.slope = slope
        SAEMError.__init__(
            self, "not a descent direction (directional derivative %r >= 0)" % (slope,)
        )

    def __reduce__(self):
        # For pickling purposes.
        return self.__class__, (self.slope,)


class LineSearchError(SAEMError):
    "Raised when no step satisfying sufficient decrease could be found."
    pass


class InitializationError(SAEMError):
    "Raised when the seed spherical map cannot be constructed fold-free."
    pass


class SolverAbortError(SAEMError):
    "Raised when the solver meets a non-finite energy and cannot continue."
    pass


class BackendUnavailableError(SAEMError, ImportError):
    "Raised when a named factorization backend cannot be imported."
    pass


# Warnings


class ResidualFoldWarning(SAEMWarning):
    "Warned when the bijective correction gives up with folds remaining."
    pass


class PreconditionerFallbackWarning(SAEMWarning):
    "Warned when the solver drops back to unpreconditioned directions."
    pass


class LineSearchWarning(SAEMWarning):
    "Warned when the solver stops early because the line search failed."
    pass


class FaceAdjacencyWarning(SAEMWarning):
    """Warned when a face's three vertices share a common outside neighbour.

    Such faces sit on a valence-3 cap and tend to degrade the parameterization.
    """
    pass
