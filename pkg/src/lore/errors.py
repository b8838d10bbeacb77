"""Exception hierarchy shared by all lore modules.

Every failure that reaches the CLI carries a short machine-readable code
(``not-a-repo``, ``bad-json``, ...) so diagnostics stay greppable and the
exit-code mapping stays mechanical.
"""

from __future__ import annotations


class LoreError(Exception):
    """Base class; ``code`` is a short kebab-case token naming the failure."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code

    def __str__(self) -> str:
        return f"{self.code}: {super().__str__()}"


class RepoError(LoreError):
    """Repository or environment failure (CLI exit code 3).

    Codes: not-a-repo, unknown-path, unknown-commit, ambiguous-prefix,
    nothing-staged, git-failed.
    """


class GitFailedError(RepoError):
    """A git subprocess exited nonzero for a reason we did not anticipate."""

    def __init__(self, message: str, stderr: str = "", exit_code: int = -1):
        super().__init__("git-failed", message)
        self.stderr = stderr
        self.exit_code = exit_code

    def __str__(self) -> str:
        base = super().__str__()
        if self.stderr.strip():
            return f"{base} (exit {self.exit_code}): {self.stderr.strip()}"
        return f"{base} (exit {self.exit_code})"


class DataError(LoreError):
    """Malformed user-supplied data (CLI exit code 4).

    Codes: bad-json, schema-violation, bad-duration, bad-config, invalid-atom.
    """


class AbortedError(LoreError):
    """The user cancelled an interactive flow."""

    def __init__(self, message: str = "cancelled by user"):
        super().__init__("aborted", message)
