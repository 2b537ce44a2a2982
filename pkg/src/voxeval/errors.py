"""Exception types shared across the package.

Both exception classes derive from :class:`ValueError` so that callers who do
not care about the distinction can catch a single builtin type.  The command
line front end maps each class to a stable error category string.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Input data violates a documented precondition or invariant."""


class FormatError(ValueError):
    """A file is malformed, truncated, or uses an unsupported encoding."""
