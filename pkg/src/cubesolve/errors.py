"""Exception hierarchy shared by every layer of the solver."""


class CubeError(Exception):
    """Base class for all errors raised by cubesolve."""


class TheoryViolation(CubeError):
    """A dimension term uses an operator outside the requested theory."""


class UnboundVariable(CubeError):
    """A dimension variable has no value or is not in scope."""


class ScopeError(CubeError):
    """A cell or dimension name is not declared where it is used."""


class IllScopedFace(CubeError):
    """A face body mentions variables that are not available on that face."""


class IncompatibleFaces(CubeError):
    """Two faces of a boundary disagree where their constraints overlap."""

    def __init__(self, face1, face2, detail=""):
        self.face1 = face1
        self.face2 = face2
        msg = f"faces {face1} and {face2} disagree"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class BoundaryMismatch(CubeError):
    """A cell does not have the boundary it was checked against."""

    def __init__(self, face, expected, actual):
        self.face = face
        self.expected = expected
        self.actual = actual
        super().__init__(f"face {face}: expected {expected}, got {actual}")


class IllFormedFill(CubeError):
    """A filler's base or walls do not fit together."""

    def __init__(self, path, detail):
        self.path = path
        super().__init__(f"ill-formed fill at {path or 'root'}: {detail}")


class Unsolvable(CubeError):
    """No cell of the requested shape solves the problem."""


class Timeout(CubeError):
    """The wall-clock budget of a search ran out."""


class DepthExhausted(CubeError):
    """Iterative deepening reached the configured depth without a solution."""


class InstanceTooLarge(CubeError):
    """An exhaustive search was asked to scan too many candidates."""


class CubeSyntaxError(CubeError):
    """Malformed `.cube` or term text, with a source location."""

    def __init__(self, line, col, expected, got=""):
        self.line = line
        self.col = col
        self.expected = expected
        msg = f"{line}:{col}: expected {expected}"
        if got:
            msg += f", got {got!r}"
        super().__init__(msg)


class InvalidDerivation(CubeError):
    """A word-equality derivation does not prove what it claims."""


class RelationNotInPresentation(CubeError):
    """A rewrite step uses a relation the presentation does not contain."""
