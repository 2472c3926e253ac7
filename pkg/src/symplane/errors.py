"""Exception types shared across the library."""


class SymmetryError(Exception):
    """Base class for all symplane errors."""


class EmptyMesh(SymmetryError):
    """Mesh has no vertices."""


class DegenerateBoundingSphere(SymmetryError):
    """All vertices coincide; the bounding sphere has zero radius."""


class NoArea(SymmetryError):
    """Every face of the mesh is degenerate; surface sampling is impossible."""


class EmptyCloud(SymmetryError):
    """Point cloud has no points."""


class DegenerateCloud(SymmetryError):
    """Cloud is collinear or coincident; rigid registration is singular."""


class EmptyGroundTruth(SymmetryError):
    """Evaluation against an empty ground-truth plane set is undefined."""


class AntipodalAmbiguity(SymmetryError):
    """Two directions are 90 degrees apart; the shortest arc to +/-target is tied."""


class InitialDirectionRejected(SymmetryError):
    """Plane alignment drifted too far from the requested direction."""


class UnsupportedFormat(SymmetryError):
    """File extension or header does not match a supported mesh/cloud format."""


class ParseError(SymmetryError):
    """Malformed mesh/cloud/document file.

    Carries the 1-based line number (text formats) or absolute byte offset
    (binary formats) where parsing failed, when known.
    """

    def __init__(self, message, line=None, byte_offset=None):
        loc = ""
        if line is not None:
            loc = f" (line {line})"
        elif byte_offset is not None:
            loc = f" (byte {byte_offset})"
        super().__init__(message + loc)
        self.line = line
        self.byte_offset = byte_offset


class CollisionWarning(UserWarning):
    """Two ground-truth normals mapped to the same hypothesis; the farther one was dropped."""
