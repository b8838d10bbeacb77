"""Shared fixtures: deterministic throwaway git repositories.

Every repository is created with a pinned identity, pinned monotonically
increasing commit dates, and isolated git config, so test output is
stable across machines and runs.
"""

from __future__ import annotations

import os
import subprocess
from pathlib import Path

import pytest

START_EPOCH = 1_700_000_000  # 2023-11-14T22:13:20Z
STEP_SECONDS = 3_600

GIT_TEST_ENV = {
    "GIT_CONFIG_GLOBAL": "/dev/null",
    "GIT_CONFIG_SYSTEM": "/dev/null",
    "GIT_CONFIG_NOSYSTEM": "1",
    "GIT_AUTHOR_NAME": "Test Author",
    "GIT_AUTHOR_EMAIL": "author@example.com",
    "GIT_COMMITTER_NAME": "Test Committer",
    "GIT_COMMITTER_EMAIL": "committer@example.com",
}


@pytest.fixture(scope="session", autouse=True)
def _hermetic_git_env():
    """Pin author identity and block user/system git config for the whole
    test session, so commits created by the library are deterministic."""
    old = {k: os.environ.get(k) for k in GIT_TEST_ENV}
    os.environ.update(GIT_TEST_ENV)
    yield
    for key, value in old.items():
        if value is None:
            os.environ.pop(key, None)
        else:
            os.environ[key] = value


class RepoFixture:
    """A scratch git repository with a deterministic commit clock."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.clock = START_EPOCH

    def git(self, *args: str, input_bytes: bytes | None = None, check: bool = True,
            env: dict[str, str] | None = None) -> subprocess.CompletedProcess:
        full_env = {**os.environ, **GIT_TEST_ENV, **(env or {})}
        proc = subprocess.run(
            ["git", *args],
            cwd=self.path,
            input=input_bytes,
            capture_output=True,
            env=full_env,
        )
        if check and proc.returncode != 0:
            raise AssertionError(
                f"git {' '.join(args)} failed: {proc.stderr.decode(errors='replace')}"
            )
        return proc

    def init(self) -> "RepoFixture":
        self.path.mkdir(parents=True, exist_ok=True)
        self.git("init", "-q", "-b", "main")
        self.git("config", "commit.gpgsign", "false")
        return self

    def write(self, relpath: str, content: str) -> None:
        target = self.path / relpath
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, encoding="utf-8")

    def commit(
        self,
        message: str,
        files: dict[str, str] | None = None,
        when: int | None = None,
        add_all: bool = False,
    ) -> str:
        """Write files, stage them, commit with a fixed timestamp.

        ``when`` overrides the fixture clock (epoch seconds); otherwise the
        clock advances one step per commit.
        """
        if when is None:
            self.clock += STEP_SECONDS
            when = self.clock
        for relpath, content in (files or {}).items():
            self.write(relpath, content)
        if add_all:
            self.git("add", "-A")
        elif files:
            self.git("add", "--", *files.keys())
        stamp = f"{when} +0000"
        self.git(
            "commit",
            "-q",
            "--cleanup=verbatim",
            "--allow-empty",
            "--allow-empty-message",
            "-F",
            "-",
            input_bytes=message.encode("utf-8"),
            env={"GIT_AUTHOR_DATE": stamp, "GIT_COMMITTER_DATE": stamp},
        )
        return self.head()

    def head(self) -> str:
        return self.git("rev-parse", "HEAD").stdout.decode().strip()

    def checkout(self, ref: str, create: bool = False) -> None:
        args = ["checkout", "-q"]
        if create:
            args.append("-b")
        args.append(ref)
        self.git(*args)

    def merge(self, ref: str, message: str, when: int | None = None) -> str:
        if when is None:
            self.clock += STEP_SECONDS
            when = self.clock
        stamp = f"{when} +0000"
        self.git(
            "merge",
            "--no-ff",
            "-q",
            "-m",
            message,
            ref,
            env={"GIT_AUTHOR_DATE": stamp, "GIT_COMMITTER_DATE": stamp},
        )
        return self.head()


@pytest.fixture
def repo(tmp_path) -> RepoFixture:
    return RepoFixture(tmp_path / "repo").init()


@pytest.fixture
def empty_dir(tmp_path) -> Path:
    d = tmp_path / "plain"
    d.mkdir()
    return d


FIG1_MESSAGE = """\
Prevent silent session drops during long-running operations

The auth service returns inconsistent status codes on token
expiry, so the interceptor catches all 4xx responses and
triggers an inline refresh.

Constraint: Auth service does not support token introspection
Constraint: Must not add latency to non-expired-token paths
Rejected: Extend token TTL to 24h | security policy violation
Rejected: Background refresh on timer | race condition
Confidence: high
Scope-risk: narrow
Reversibility: clean
Directive: Error handling is intentionally broad (all 4xx)
  -- do not narrow without verifying upstream behavior
Tested: Single expired token refresh (unit)
Not-tested: Auth service cold-start > 500ms behavior
"""


@pytest.fixture
def fig1_message() -> str:
    return FIG1_MESSAGE
