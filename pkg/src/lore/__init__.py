"""lore: decision records in git commit trailers, and queries over them.

The format layer (:mod:`lore.atoms`) is pure text processing and usable
on its own; the rest of the package layers history queries, authoring and
a CLI on top of the git executable.
"""

from .atoms import (
    CANONICAL_KEYS,
    ConfidenceLevel,
    ConstraintEntry,
    DirectiveEntry,
    ExtensionTrailer,
    Finding,
    LoreAtom,
    ParseReport,
    RejectedEntry,
    RelatedRef,
    Reversibility,
    ScopeRisk,
    TestEntry,
    lint_atom,
    parse_message,
    parse_rejected_value,
    parse_test_value,
    serialize_atom,
    split_trailer_block,
)
from .authoring import (
    AtomDraft,
    ValidationReport,
    build_from_structured,
    build_interactive,
    render_structured,
    validate,
)
from .config import (
    DetectionResult,
    LoreConfig,
    detect_lore_repo,
    load_config,
    parse_duration,
)
from .errors import AbortedError, DataError, GitFailedError, LoreError, RepoError
from .queries import (
    AttributedAtom,
    ChainResult,
    ConstraintSet,
    ContextSummary,
    CoverageMap,
    DirectiveList,
    QueryOptions,
    RejectedLedger,
    StaleReport,
    constraints,
    context,
    coverage,
    directives,
    rejected,
    related_chain,
    stale,
)
from .repo import (
    CommitRecord,
    HistoryQuery,
    create_commit,
    list_commits,
    read_commit,
    repo_root,
)

__version__ = "0.1.0"
