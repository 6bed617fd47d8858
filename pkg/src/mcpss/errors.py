"""Exception types shared across the package.

The CLI maps each family to its own exit code, so library code raises the
most specific class that applies.
"""


class MCPError(Exception):
    """Base class for all errors raised by mcpss."""


class ConfigError(MCPError, ValueError):
    """A parameter is out of range or inconsistent with another one."""


class ParseError(MCPError, ValueError):
    """Input data is malformed.

    ``record_id`` and ``position`` are filled in when known so that callers
    can point at the offending residue.
    """

    def __init__(self, message, record_id=None, position=None):
        parts = []
        if record_id is not None:
            parts.append(f"record {record_id!r}")
        if position is not None:
            parts.append(f"position {position}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.record_id = record_id
        self.position = position


class ConvergenceError(MCPError, RuntimeError):
    """An iterative solver ran out of its iteration budget."""

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation
