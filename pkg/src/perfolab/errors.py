"""Exception hierarchy shared by every perfolab module."""


class PerfolabError(Exception):
    """Base class for all library errors."""


class InvalidVertexError(PerfolabError, ValueError):
    pass


class CapExceededError(PerfolabError, ValueError):
    """An exhaustive search was asked to run beyond its configured size cap."""


class FormulaSyntaxError(PerfolabError, ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnboundVariableError(PerfolabError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unbound variable"


class UnknownRelationError(PerfolabError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown relation"


class NotASentenceError(PerfolabError, ValueError):
    pass


class RelationAtomError(PerfolabError, ValueError):
    """Raised when an operation defined only over Adj/Eq atoms meets a Rel atom."""


class CostGuardError(PerfolabError, ValueError):
    pass


class ConfigError(PerfolabError, ValueError):
    pass


class ConsistencyError(PerfolabError, AssertionError):
    """Internal self-check failed (e.g. a truncated distribution lost too much mass)."""
