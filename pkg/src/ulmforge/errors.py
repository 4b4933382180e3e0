class ParseError(ValueError):
    """Text input does not match the documented format."""


class NotAModelError(ValueError):
    """A structure fails T_p and cannot be decoded."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class TableError(ValueError):
    """A Cayley table does not define an abelian p-group."""
