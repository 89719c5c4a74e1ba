"""Method-level reuse detection against a local fingerprint index.

Each method body is abstracted (identifiers become positional placeholders,
literals become type tags, comments and layout vanish) and hashed, so two
methods match exactly when they are the same code up to renaming, literal
changes, and formatting. Matching is whole-method, exact-hash only.
"""

from __future__ import annotations

import ast
import bisect
import hashlib
import io
import json
import keyword
import logging
import re
import textwrap
import tokenize
from dataclasses import dataclass
from pathlib import Path

from .ingest import scan_repository

logger = logging.getLogger(__name__)

HASH_HEX_LENGTH = 64
_TOKEN_SEPARATOR = b"\x1f"

DIRECTION_UNDETERMINED = "undetermined"
DIRECTION_REUSED_BY_OTHERS = "reused-by-others"
DIRECTION_REUSING_OTHERS = "reusing-others"

_C_FAMILY = frozenset({"c", "cpp", "java", "javascript", "typescript", "go", "rust", "csharp"})

_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUMBER_RE = re.compile(
    r"(?:0[xXbBoO][0-9a-fA-F_]+|(?:\d[\d_]*(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)[uUlLfFdDn]*"
)

# Words that may directly precede '(' without starting a method definition.
_NON_METHOD_WORDS = frozenset(
    {
        "if", "for", "while", "switch", "catch", "return", "sizeof", "do", "else",
        "new", "delete", "throw", "assert", "synchronized", "lock", "using",
        "foreach", "match", "loop", "func", "fn", "defer", "typeof", "decltype",
        "static_assert", "alignof",
    }
)

_C_KEYWORDS = frozenset(
    {
        "auto", "break", "case", "char", "const", "continue", "default", "do",
        "double", "else", "enum", "extern", "float", "for", "goto", "if", "inline",
        "int", "long", "register", "restrict", "return", "short", "signed",
        "sizeof", "static", "struct", "switch", "typedef", "union", "unsigned",
        "void", "volatile", "while",
        # shared extras across the brace-delimited family
        "class", "public", "private", "protected", "new", "delete", "this",
        "namespace", "template", "typename", "try", "catch", "throw", "true",
        "false", "null", "nullptr", "bool", "var", "let", "function", "import",
        "export", "package", "interface", "implements", "extends", "final",
        "abstract", "boolean", "byte", "instanceof", "native", "super",
        "synchronized", "throws", "transient", "fn", "func", "impl", "pub",
        "mut", "use", "mod", "match", "loop", "defer", "go", "chan", "range",
        "map", "type", "trait", "where", "async", "await", "yield",
    }
)


class TokenizationError(ValueError):
    """The method body could not be tokenized for abstraction."""


@dataclass(frozen=True)
class MethodSpan:
    """One extracted method: its location and verbatim body text."""

    file: Path
    language: str
    name: str
    start_line: int
    end_line: int
    body_text: str

    def __post_init__(self) -> None:
        if self.start_line < 1 or self.end_line < self.start_line:
            raise ValueError(f"bad line range {self.start_line}..{self.end_line}")
        if not self.body_text:
            raise ValueError("body_text must be non-empty")


@dataclass(frozen=True)
class MethodFingerprint:
    """Digest of one abstracted method, tied back to its source location."""

    hash: str
    method: str
    file: str
    line: int
    project: str

    def __post_init__(self) -> None:
        if len(self.hash) != HASH_HEX_LENGTH or not re.fullmatch(r"[0-9a-f]+", self.hash):
            raise ValueError(f"hash must be {HASH_HEX_LENGTH} lowercase hex chars")
        if self.line < 1:
            raise ValueError("line must be >= 1")

    def to_dict(self) -> dict:
        return {
            "hash": self.hash,
            "method": self.method,
            "file": self.file,
            "line": self.line,
            "project": self.project,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MethodFingerprint":
        return cls(
            hash=data["hash"],
            method=data["method"],
            file=data["file"],
            line=data["line"],
            project=data["project"],
        )


@dataclass(frozen=True)
class IndexEntry:
    project: str
    method: str
    file: str
    line: int

    def to_dict(self) -> dict:
        return {"project": self.project, "method": self.method, "file": self.file, "line": self.line}

    @classmethod
    def from_dict(cls, data: dict) -> "IndexEntry":
        return cls(project=data["project"], method=data["method"], file=data["file"], line=data["line"])


class ReuseIndex:
    """Immutable multimap from fingerprint hash to the methods carrying it."""

    def __init__(self, entries: dict[str, tuple[IndexEntry, ...]] | None = None):
        self._entries = {h: tuple(items) for h, items in (entries or {}).items() if items}

    def lookup(self, fingerprint_hash: str) -> tuple[IndexEntry, ...]:
        return self._entries.get(fingerprint_hash, ())

    @property
    def project_count(self) -> int:
        return len({entry.project for items in self._entries.values() for entry in items})

    def record_count(self) -> int:
        return sum(len(items) for items in self._entries.values())

    def hashes(self) -> tuple[str, ...]:
        return tuple(sorted(self._entries))

    def merge(self, other: "ReuseIndex") -> "ReuseIndex":
        merged: dict[str, list[IndexEntry]] = {h: list(items) for h, items in self._entries.items()}
        for h, items in other._entries.items():
            bucket = merged.setdefault(h, [])
            for entry in items:
                if entry not in bucket:
                    bucket.append(entry)
        return ReuseIndex({h: tuple(items) for h, items in merged.items()})

    def write(self, path: Path | str) -> None:
        """Write the index as JSON lines, one fingerprint record per line."""
        records = []
        for fingerprint_hash in sorted(self._entries):
            for entry in sorted(
                self._entries[fingerprint_hash], key=lambda e: (e.project, e.file, e.line)
            ):
                records.append({"hash": fingerprint_hash, **entry.to_dict()})
        lines = [json.dumps(record, sort_keys=True) for record in records]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

    @classmethod
    def load(cls, path: Path | str) -> "ReuseIndex":
        entries: dict[str, list[IndexEntry]] = {}
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                entry = IndexEntry.from_dict(record)
                fingerprint_hash = record["hash"]
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"bad index record at {path}:{lineno}: {exc}") from exc
            entries.setdefault(fingerprint_hash, []).append(entry)
        return cls({h: tuple(items) for h, items in entries.items()})


@dataclass(frozen=True)
class ReuseMatch:
    local: MethodFingerprint
    remote: tuple[IndexEntry, ...]
    direction: str = DIRECTION_UNDETERMINED

    def to_dict(self) -> dict:
        return {
            "local": self.local.to_dict(),
            "remote": [entry.to_dict() for entry in self.remote],
            "direction": self.direction,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReuseMatch":
        return cls(
            local=MethodFingerprint.from_dict(data["local"]),
            remote=tuple(IndexEntry.from_dict(item) for item in data["remote"]),
            direction=data["direction"],
        )


@dataclass(frozen=True)
class ReuseReport:
    """All index hits for the analyzed repository plus the distinct-project count."""

    matches: tuple[ReuseMatch, ...]
    n_reuse_projects: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "matches", tuple(self.matches))
        distinct = {entry.project for match in self.matches for entry in match.remote}
        if self.n_reuse_projects != len(distinct):
            raise ValueError(
                f"n_reuse_projects {self.n_reuse_projects} != distinct remote projects {len(distinct)}"
            )

    def to_dict(self) -> dict:
        return {
            "matches": [match.to_dict() for match in self.matches],
            "n_reuse_projects": self.n_reuse_projects,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReuseReport":
        return cls(
            matches=tuple(ReuseMatch.from_dict(item) for item in data["matches"]),
            n_reuse_projects=data["n_reuse_projects"],
        )


def _python_spans(text: str, file_path: Path) -> list[MethodSpan]:
    try:
        tree = ast.parse(text)
    except (SyntaxError, ValueError) as exc:
        logger.warning("unparsable python file skipped: %s (%s)", file_path, exc)
        return []
    lines = text.splitlines()
    spans: list[MethodSpan] = []

    def add(node: ast.AST) -> None:
        body = "\n".join(lines[node.lineno - 1 : node.end_lineno]) + "\n"
        spans.append(
            MethodSpan(
                file=file_path,
                language="python",
                name=node.name,
                start_line=node.lineno,
                end_line=node.end_lineno,
                body_text=body,
            )
        )

    def walk_class(node: ast.ClassDef) -> None:
        for item in node.body:
            if isinstance(item, (ast.FunctionDef, ast.AsyncFunctionDef)):
                add(item)
            elif isinstance(item, ast.ClassDef):
                walk_class(item)

    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            add(node)
        elif isinstance(node, ast.ClassDef):
            walk_class(node)
    return spans


def _scan_string_end(text: str, start: int) -> int:
    """Index just past the literal opening at text[start] (escape-aware)."""
    quote = text[start]
    i = start + 1
    n = len(text)
    while i < n:
        if text[i] == "\\":
            i += 2
            continue
        if text[i] == quote:
            return i + 1
        i += 1
    return n


def _mask_comments_and_strings(text: str) -> str:
    """Blank out comments and string literals, preserving length and newlines."""
    out = list(text)
    i = 0
    n = len(text)

    def blank(start: int, end: int) -> None:
        for k in range(start, end):
            if out[k] != "\n":
                out[k] = " "

    while i < n:
        ch = text[i]
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            j = text.find("\n", i)
            j = n if j == -1 else j
            blank(i, j)
            i = j
        elif ch == "/" and i + 1 < n and text[i + 1] == "*":
            j = text.find("*/", i + 2)
            j = n if j == -1 else j + 2
            blank(i, j)
            i = j
        elif ch in '"`':
            j = _scan_string_end(text, i)
            blank(i, j)
            i = j
        elif ch == "'":
            # A quote this far from its close is a lifetime marker, not a char
            # literal; leave it alone in that case.
            j = _scan_string_end(text, i)
            if j - i <= 10:
                blank(i, j)
                i = j
            else:
                i += 1
        else:
            i += 1
    return "".join(out)


def _match_forward(text: str, start: int, open_ch: str, close_ch: str) -> int | None:
    """Index just past the bracket closing text[start]; None if unbalanced."""
    depth = 0
    for i in range(start, len(text)):
        if text[i] == open_ch:
            depth += 1
        elif text[i] == close_ch:
            depth -= 1
            if depth == 0:
                return i + 1
    return None


def _generic_suffix_end(text: str, start: int, limit: int = 200) -> int | None:
    """Index just past a balanced <...> group, or None if it reads like a comparison."""
    depth = 0
    for i in range(start, min(len(text), start + limit)):
        ch = text[i]
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
            if depth == 0:
                return i + 1
        elif ch in ";{}()":
            return None
    return None


def _brace_spans(text: str, language: str, file_path: Path) -> list[MethodSpan]:
    masked = _mask_comments_and_strings(text)
    lines = text.splitlines()
    newline_positions = [m.start() for m in re.finditer("\n", masked)]

    def line_of(pos: int) -> int:
        return bisect.bisect_right(newline_positions, pos - 1) + 1

    spans: list[MethodSpan] = []
    depth = 0
    last_word: tuple[str, int] | None = None
    i = 0
    n = len(masked)
    while i < n:
        ch = masked[i]
        if ch == "{":
            depth += 1
            i += 1
        elif ch == "}":
            depth = max(0, depth - 1)
            i += 1
        elif ch == "(" and last_word is not None and depth <= 1:
            word, word_pos = last_word
            candidate = word not in _NON_METHOD_WORDS
            after_args = _match_forward(masked, i, "(", ")") if candidate else None
            if after_args is not None:
                k = after_args
                body_open = None
                while k < n:
                    if masked[k] == "{":
                        body_open = k
                        break
                    if masked[k] in ";=,)":
                        break
                    k += 1
                body_close = (
                    _match_forward(masked, body_open, "{", "}") if body_open is not None else None
                )
                if body_close is not None:
                    start_line = line_of(word_pos)
                    end_line = line_of(body_close - 1)
                    body = "\n".join(lines[start_line - 1 : end_line]) + "\n"
                    spans.append(
                        MethodSpan(
                            file=file_path,
                            language=language,
                            name=word,
                            start_line=start_line,
                            end_line=end_line,
                            body_text=body,
                        )
                    )
                    i = body_close
                    last_word = None
                    continue
            i += 1
            last_word = None
        elif _IDENT_RE.match(masked, i):
            match = _IDENT_RE.match(masked, i)
            last_word = (match.group(0), i)
            i = match.end()
        else:
            if ch == "<" and last_word is not None:
                # a generic parameter list directly before '(' keeps the
                # identifier as the method name: fn head<'a>(..), copy<T>(..)
                close = _generic_suffix_end(masked, i)
                if close is not None:
                    k = close
                    while k < n and masked[k].isspace():
                        k += 1
                    if k < n and masked[k] == "(":
                        i = close
                        continue
            # Any other symbol between an identifier and '(' means the
            # identifier cannot be the method name (pointers, array access).
            if not ch.isspace():
                last_word = None
            i += 1
    return spans


def extract_methods(file_path: Path | str, language: str) -> list[MethodSpan]:
    """Extract one span per top-level function or method definition.

    Nested definitions stay inside their enclosing span. Unsupported languages
    and unparsable files are skipped with a warning, yielding no spans.
    """
    path = Path(file_path)
    try:
        text = path.read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        logger.warning("unreadable source file skipped: %s (%s)", path, exc)
        return []
    if language == "python":
        return _python_spans(text, path)
    if language in _C_FAMILY:
        return _brace_spans(text, language, path)
    logger.warning("unsupported language %r for %s; file skipped", language, path)
    return []


def _abstract_python(text: str) -> tuple[str, ...]:
    source = textwrap.dedent(text)
    if not source.endswith("\n"):
        source += "\n"
    tokens: list[str] = []
    placeholders: dict[str, str] = {}
    try:
        for tok in tokenize.generate_tokens(io.StringIO(source).readline):
            kind, value = tok.type, tok.string
            if kind in (tokenize.COMMENT, tokenize.NL, tokenize.ENDMARKER):
                continue
            if kind == tokenize.NEWLINE:
                tokens.append("NEWLINE")
            elif kind == tokenize.INDENT:
                tokens.append("INDENT")
            elif kind == tokenize.DEDENT:
                tokens.append("DEDENT")
            elif kind == tokenize.NUMBER:
                tokens.append("LITNUM")
            elif kind == tokenize.STRING:
                tokens.append("LITSTR")
            elif kind == tokenize.NAME:
                if keyword.iskeyword(value):
                    tokens.append(value)
                else:
                    tokens.append(placeholders.setdefault(value, f"V{len(placeholders) + 1}"))
            elif kind == tokenize.OP:
                tokens.append(value)
            elif value:
                tokens.append(value)
    except (tokenize.TokenError, IndentationError, SyntaxError) as exc:
        raise TokenizationError(f"cannot tokenize python method body: {exc}") from exc
    return tuple(tokens)


def _abstract_c_family(text: str) -> tuple[str, ...]:
    tokens: list[str] = []
    placeholders: dict[str, str] = {}
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            j = text.find("\n", i)
            i = n if j == -1 else j + 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "*":
            j = text.find("*/", i + 2)
            i = n if j == -1 else j + 2
            continue
        if ch in '"`' or (ch == "'" and _scan_string_end(text, i) - i <= 10):
            tokens.append("LITSTR")
            i = _scan_string_end(text, i)
            continue
        if ch == "'":  # rust lifetime marker, not a literal
            tokens.append(ch)
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            match = _NUMBER_RE.match(text, i)
            if match is None:
                raise TokenizationError(f"cannot tokenize number at offset {i}")
            tokens.append("LITNUM")
            i = match.end()
            continue
        ident = _IDENT_RE.match(text, i)
        if ident:
            word = ident.group(0)
            if word in _C_KEYWORDS:
                tokens.append(word)
            else:
                tokens.append(placeholders.setdefault(word, f"V{len(placeholders) + 1}"))
            i = ident.end()
            continue
        tokens.append(ch)
        i += 1
    return tuple(tokens)


def abstract_method(span: MethodSpan) -> tuple[str, ...]:
    """Abstract a method body into the token stream that gets hashed.

    Identifiers become V1, V2, ... in order of first appearance; number and
    string literals become LITNUM/LITSTR; comments and layout are dropped;
    keywords and operators stay verbatim.
    """
    if span.language == "python":
        return _abstract_python(span.body_text)
    if span.language in _C_FAMILY:
        return _abstract_c_family(span.body_text)
    raise TokenizationError(f"unsupported language {span.language!r}")


def fingerprint(tokens: tuple[str, ...]) -> str:
    """SHA-256 over the canonical token serialization (single separator byte)."""
    if not tokens:
        raise ValueError("cannot fingerprint an empty token sequence")
    payload = _TOKEN_SEPARATOR.join(token.encode("utf-8") for token in tokens)
    return hashlib.sha256(payload).hexdigest()


def fingerprint_tree(root: Path | str, project_id: str) -> list[MethodFingerprint]:
    """Fingerprint every supported-language method under a project root.

    File paths inside the fingerprints are stored relative to the root so the
    records stay portable.
    """
    root = Path(root).resolve()
    inventory = scan_repository(root)
    fingerprints: list[MethodFingerprint] = []
    for source in inventory.source_files:
        for span in extract_methods(source.path, source.language):
            try:
                tokens = abstract_method(span)
            except TokenizationError as exc:
                logger.warning("skipping %s:%s: %s", span.file, span.start_line, exc)
                continue
            if not tokens:
                continue
            fingerprints.append(
                MethodFingerprint(
                    hash=fingerprint(tokens),
                    method=span.name,
                    file=span.file.relative_to(root).as_posix(),
                    line=span.start_line,
                    project=project_id,
                )
            )
    return fingerprints


def build_index(project_sources: list[tuple[str, Path | str]]) -> ReuseIndex:
    """Index every method fingerprint of every listed project.

    Unreadable projects are recorded and skipped; they never abort the build.
    """
    entries: dict[str, list[IndexEntry]] = {}
    for project_id, root in project_sources:
        try:
            fingerprints = fingerprint_tree(root, project_id)
        except (OSError, FileNotFoundError) as exc:
            logger.warning("project %s could not be indexed: %s", project_id, exc)
            continue
        for fp in fingerprints:
            entries.setdefault(fp.hash, []).append(
                IndexEntry(project=fp.project, method=fp.method, file=fp.file, line=fp.line)
            )
    return ReuseIndex({h: tuple(items) for h, items in entries.items()})


def match_repository(
    local_fingerprints: list[MethodFingerprint],
    index: ReuseIndex,
    self_project_id: str,
    commit_dates: dict[str, "object"] | None = None,
) -> ReuseReport:
    """Look up every local fingerprint in the index, excluding the project itself.

    Direction stays "undetermined" unless commit dates are supplied for both
    sides of a match.
    """
    matches: list[ReuseMatch] = []
    for fp in sorted(local_fingerprints, key=lambda f: (f.file, f.line, f.hash)):
        remote = tuple(
            sorted(
                (entry for entry in index.lookup(fp.hash) if entry.project != self_project_id),
                key=lambda e: (e.project, e.file, e.line),
            )
        )
        if not remote:
            continue
        direction = DIRECTION_UNDETERMINED
        if commit_dates:
            own = commit_dates.get(self_project_id)
            remote_dates = [commit_dates.get(entry.project) for entry in remote]
            if own is not None and all(d is not None for d in remote_dates):
                if all(d > own for d in remote_dates):
                    direction = DIRECTION_REUSED_BY_OTHERS
                elif all(d < own for d in remote_dates):
                    direction = DIRECTION_REUSING_OTHERS
        matches.append(ReuseMatch(local=fp, remote=remote, direction=direction))
    distinct = {entry.project for match in matches for entry in match.remote}
    return ReuseReport(matches=tuple(matches), n_reuse_projects=len(distinct))
