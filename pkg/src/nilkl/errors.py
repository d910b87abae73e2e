"""Exception hierarchy shared by all nilkl modules."""


class NilklError(Exception):
    """Base class for every error raised by this package."""


class InvalidStructure(NilklError, ValueError):
    """Structure constants fail antisymmetry or the Jacobi identity."""


class JacobiViolation(InvalidStructure):
    """Declared coframe differentials do not define a Lie algebra (d^2 != 0)."""


class NotUnitary(NilklError, ValueError):
    pass


class DimensionMismatch(NilklError, ValueError):
    pass


class UnknownKind(NilklError, ValueError):
    pass


class NotNormal(NilklError, ValueError):
    pass


class NotCommuting(NilklError, ValueError):
    pass


class NotNilpotent(NilklError, ValueError):
    pass


class TheoremViolation(NilklError, RuntimeError):
    """A decision contradicts a proven theorem; indicates an implementation bug."""


class InternalConsistencyError(NilklError, RuntimeError):
    """Two independent decision paths disagree."""


class UnknownFamily(NilklError, ValueError):
    pass


class ParamOutOfRange(NilklError, ValueError):
    pass


class BadRange(NilklError, ValueError):
    pass


class ParseError(NilklError, ValueError):
    pass
