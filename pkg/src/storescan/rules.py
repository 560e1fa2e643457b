"""Detection vocabularies and per-method marking.

A method is marked along three independent criteria:

* it obtains a shared-storage location (path API call or hardcoded path),
* it mentions a private-looking path keyword in a string constant,
* it creates a file or directory (write sink).
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .smali_ir import Invoke, MethodDef, MethodRef, StringConst

DEFAULT_KEYWORDS = [
    "log",
    "cache",
    "files",
    "file",
    "data",
    "temp",
    "tmp",
    "account",
    "meta",
    "uid",
    "history",
]

DEFAULT_PATH_API_NAMES = [
    "getExternalStorageDirectory",
    "getExternalStoragePublicDirectory",
    "getExternalFilesDir",
    "getExternalFilesDirs",
    "getExternalCacheDir",
    "getExternalCacheDirs",
]

DEFAULT_HARDCODED_PATH_PREFIXES = ["/sdcard", "/sdcard0", "/sdcard1"]

DEFAULT_WRITE_SINKS = [
    ("Ljava/io/FileOutputStream;", "<init>"),
    ("Ljava/io/File;", "mkdir"),
    ("Ljava/io/File;", "mkdirs"),
]


class RuleFormatError(ValueError):
    """A ruleset file or ruleset value violates the format contract."""


@dataclass
class RuleSet:
    """The three criterion vocabularies. Immutable by convention after load."""

    keywords: list[str]
    path_api_names: list[str]
    hardcoded_path_prefixes: list[str]
    write_sinks: list[tuple[str, str]]

    def __post_init__(self):
        for label, entries in (
            ("keywords", self.keywords),
            ("path_apis", self.path_api_names),
            ("hardcoded_paths", self.hardcoded_path_prefixes),
        ):
            _check_entries(label, entries)
        if any(kw != kw.lower() for kw in self.keywords):
            raise RuleFormatError("keywords must be lowercase")
        for pair in self.write_sinks:
            if len(pair) != 2 or not pair[0] or not pair[1]:
                raise RuleFormatError(f"bad write_sink entry {pair!r}")
        if len(set(self.write_sinks)) != len(self.write_sinks):
            raise RuleFormatError("duplicate entry in write_sinks")


def _check_entries(label: str, entries: list[str]) -> None:
    if any(not e for e in entries):
        raise RuleFormatError(f"empty entry in {label}")
    if len(set(entries)) != len(entries):
        raise RuleFormatError(f"duplicate entry in {label}")


def default_ruleset() -> RuleSet:
    return RuleSet(
        keywords=list(DEFAULT_KEYWORDS),
        path_api_names=list(DEFAULT_PATH_API_NAMES),
        hardcoded_path_prefixes=list(DEFAULT_HARDCODED_PATH_PREFIXES),
        write_sinks=list(DEFAULT_WRITE_SINKS),
    )


class KeywordHit(NamedTuple):
    value: str  # the full string constant
    keyword: str
    line: int


class PathSourceHit(NamedTuple):
    evidence: str  # API name or the hardcoded-path string literal
    line: int


class WriteSinkHit(NamedTuple):
    target: MethodRef
    line: int


@dataclass
class MarkSet:
    """Per-method rule hits; category flags are the lists' non-emptiness."""

    keyword_hits: list[KeywordHit]
    path_source_hits: list[PathSourceHit]
    write_sink_hits: list[WriteSinkHit]


_TOKEN_SPLIT_RE = re.compile(r"[/\\._\- ]")


def match_keyword(s: str, keywords: list[str]) -> list[str]:
    """Whole-word keyword matching over a path-like string.

    Strings without a ``/`` or ``.`` are not path-like and never match.
    Eligible strings are split on ``/ \\ . _ -`` and space; a keyword matches
    when it equals one of the tokens, case-insensitively. So ``/user_log``
    and ``user.log`` match ``log`` while ``catalog.txt`` and a bare ``log``
    do not. Results are deduplicated, in ``keywords`` order.
    """
    if "/" not in s and "." not in s:
        return []
    tokens = {t.lower() for t in _TOKEN_SPLIT_RE.split(s) if t}
    return [kw for kw in keywords if kw in tokens]


def _matches_hardcoded_prefix(value: str, prefixes: list[str]) -> bool:
    # Prefix must be followed by '/' or end the string: "/sdcard" and
    # "/sdcard/x" hit, "/sdcards/x" does not.
    return any(value == p or value.startswith(p + "/") for p in prefixes)


def mark_function(m: MethodDef, rules: RuleSet) -> MarkSet:
    """Compute the method's rule hits, each with its source line.

    Path APIs are matched by method name on any declaring class; hardcoded
    paths and keywords are matched on string constants only.
    """
    api_names = set(rules.path_api_names)
    sinks = set(rules.write_sinks)
    keyword_hits: list[KeywordHit] = []
    path_source_hits: list[PathSourceHit] = []
    write_sink_hits: list[WriteSinkHit] = []
    for ins in m.body:
        if isinstance(ins, Invoke):
            t = ins.target
            if t.name in api_names:
                path_source_hits.append(PathSourceHit(t.name, ins.source_line))
            if (t.class_descriptor, t.name) in sinks:
                write_sink_hits.append(WriteSinkHit(t, ins.source_line))
        elif isinstance(ins, StringConst):
            for kw in match_keyword(ins.value, rules.keywords):
                keyword_hits.append(KeywordHit(ins.value, kw, ins.source_line))
            if _matches_hardcoded_prefix(ins.value, rules.hardcoded_path_prefixes):
                path_source_hits.append(PathSourceHit(ins.value, ins.source_line))
    return MarkSet(keyword_hits, path_source_hits, write_sink_hits)


_SECTION_NAMES = ("keywords", "path_apis", "hardcoded_paths", "write_sinks")


def load_ruleset(file: str | Path) -> RuleSet:
    """Load a ruleset file; sections not present inherit the defaults.

    Format: ``[section]`` headers (keywords, path_apis, hardcoded_paths,
    write_sinks), one entry per line, ``#`` starts a comment line.
    Write-sink entries are ``Lpkg/Cls;::methodName``.
    """
    text = Path(file).read_text(encoding="utf-8")
    sections: dict[str, list[str]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SECTION_NAMES:
                raise RuleFormatError(f"line {lineno}: unknown section [{name}]")
            if name in sections:
                raise RuleFormatError(f"line {lineno}: duplicate section [{name}]")
            sections[name] = []
            current = name
            continue
        if current is None:
            raise RuleFormatError(f"line {lineno}: entry before any section header")
        sections[current].append(line)

    defaults = default_ruleset()
    keywords = (
        [e.lower() for e in sections["keywords"]]
        if "keywords" in sections
        else defaults.keywords
    )
    path_apis = sections.get("path_apis", defaults.path_api_names)
    prefixes = sections.get("hardcoded_paths", defaults.hardcoded_path_prefixes)
    if "write_sinks" in sections:
        write_sinks = [_parse_sink_entry(e) for e in sections["write_sinks"]]
    else:
        write_sinks = defaults.write_sinks
    return RuleSet(keywords, path_apis, prefixes, write_sinks)


def _parse_sink_entry(entry: str) -> tuple[str, str]:
    cls, sep, name = entry.partition("::")
    if not sep or not cls or not name:
        raise RuleFormatError(f"bad write_sink entry {entry!r} (expected Lpkg/Cls;::name)")
    return (cls, name)


def ruleset_digest(rules: RuleSet) -> str:
    """Stable sha256 over the effective ruleset, for report attribution."""
    payload = json.dumps(
        {
            "keywords": rules.keywords,
            "path_apis": rules.path_api_names,
            "hardcoded_paths": rules.hardcoded_path_prefixes,
            "write_sinks": [list(pair) for pair in rules.write_sinks],
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
