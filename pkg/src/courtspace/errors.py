"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2), numerical
breakdowns from :class:`NumericError` (exit code 3).
"""


class CourtspaceError(Exception):
    """Base class for all package errors."""


class InputError(CourtspaceError, ValueError):
    pass


class NumericError(CourtspaceError, ArithmeticError):
    pass


class MalformedRow(InputError):
    def __init__(self, line_no, reason=""):
        self.line_no = line_no
        msg = f"malformed row at line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class EmptyInput(InputError):
    def __init__(self, msg="no data rows"):
        super().__init__(msg)


class UnknownTag(InputError):
    def __init__(self, tag_id):
        self.tag_id = tag_id
        super().__init__(f"roster tag {tag_id!r} has no trajectory")


class NonmonotonicTime(InputError):
    def __init__(self, index, tag_id=None):
        self.index = index
        self.tag_id = tag_id
        where = f" for tag {tag_id!r}" if tag_id is not None else ""
        super().__init__(f"timestamps not strictly increasing at sample {index}{where}")


class TooFewPlayers(InputError):
    pass


class EmptyVector(InputError):
    pass


class MissingPeriod(InputError):
    def __init__(self, t_ms):
        self.t_ms = t_ms
        super().__init__(f"no period / attack direction for t={t_ms} ms")


class Misaligned(InputError):
    pass


class RosterMismatch(InputError):
    pass


class TooManyClusters(InputError):
    def __init__(self, k, n_rows):
        self.k = k
        self.n_rows = n_rows
        super().__init__(f"k={k} exceeds the number of rows ({n_rows})")


class EmptyCluster(InputError):
    pass


class EigenFailure(NumericError):
    pass


class MalformedEvent(InputError):
    def __init__(self, line, reason=""):
        self.line = line
        msg = f"malformed event at {line}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class UnbalancedPeriods(InputError):
    pass


class IoFailure(CourtspaceError, OSError):
    pass
