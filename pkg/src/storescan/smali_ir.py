"""Parser and renderer for a pragmatic subset of the smali class-file format.

Only the instruction families the detection rules consume are interpreted:
``invoke-*``, ``const-string`` (including ``/jumbo``), and ``new-instance``.
Every other body line is kept verbatim as an opaque instruction, so a parsed
class can be rendered back without losing information.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

SMALI_EXTENSION = ".smali"

#: Identity of a method within one app: (owner descriptor, name, proto).
MethodKey = tuple[str, str, str]


class SmaliParseError(Exception):
    """A class file could not be parsed. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedDirectiveError(SmaliParseError):
    """Bad `.class`, `.super`, or `.method` syntax."""


class UnterminatedMethodError(SmaliParseError):
    """A `.method` with no matching `.end method`."""


class DuplicateMethodError(SmaliParseError):
    """Two methods in one class share (name, proto)."""


class DuplicateClassError(Exception):
    """Two files in one app directory declare the same class descriptor."""


@dataclass(frozen=True)
class MethodRef:
    """Target of an invoke: owner descriptor, method name, smali proto."""

    class_descriptor: str
    name: str
    proto: str

    def __str__(self) -> str:
        return f"{self.class_descriptor}->{self.name}{self.proto}"


# source_line and raw_line are provenance, excluded from equality so that
# structural comparison survives re-rendering.


@dataclass
class Invoke:
    kind: str  # virtual | super | direct | static | interface
    target: MethodRef
    source_line: int = field(default=0, compare=False)
    raw_line: str | None = field(default=None, compare=False, repr=False)


@dataclass
class StringConst:
    value: str
    source_line: int = field(default=0, compare=False)
    raw_line: str | None = field(default=None, compare=False, repr=False)


@dataclass
class NewInstance:
    type_descriptor: str
    source_line: int = field(default=0, compare=False)
    raw_line: str | None = field(default=None, compare=False, repr=False)


@dataclass
class Opaque:
    """Any body line we do not interpret, kept byte-for-byte."""

    raw_line: str
    source_line: int = field(default=0, compare=False)


Instruction = Invoke | StringConst | NewInstance | Opaque


@dataclass
class MethodDef:
    owner: str
    name: str
    proto: str
    flags: list[str] = field(default_factory=list)
    body: list[Instruction] = field(default_factory=list)

    @property
    def key(self) -> MethodKey:
        return (self.owner, self.name, self.proto)


@dataclass
class ClassDef:
    descriptor: str
    super_descriptor: str = ""
    flags: list[str] = field(default_factory=list)
    #: Non-directive-critical lines outside method bodies (fields, annotations,
    #: comments), kept verbatim in source order.
    metadata: list[str] = field(default_factory=list)
    methods: list[MethodDef] = field(default_factory=list)
    source_file: str = ""


@dataclass
class AppModel:
    """One app's parsed classes; ``app_id`` is corpus-unique."""

    app_id: str
    classes: list[ClassDef] = field(default_factory=list)


def method_key_str(key: MethodKey) -> str:
    """Render a method identity as ``Lpkg/Cls;->name(proto)Ret``."""
    return f"{key[0]}->{key[1]}{key[2]}"


_CLASS_DESC_RE = re.compile(r"^L[^\s;]+;$")
_INVOKE_RE = re.compile(
    r"^invoke-(virtual|super|direct|static|interface)(?:/range)?\s+"
    r"\{[^}]*\}\s*,\s*(\S+?)->([^\s(]+)(\([^)]*\)\S+)$"
)
_CONST_STRING_RE = re.compile(r'^const-string(?:/jumbo)?\s+[vp]\d+\s*,\s*"(.*)"\s*$')
_NEW_INSTANCE_RE = re.compile(r"^new-instance\s+[vp]\d+\s*,\s*(L[^\s;]+;)$")
_METHOD_SIG_RE = re.compile(r"^([^\s(]+)(\([^)]*\)\S+)$")

_UNESCAPE_MAP = {
    '"': '"',
    "'": "'",
    "\\": "\\",
    "n": "\n",
    "t": "\t",
    "r": "\r",
    "b": "\b",
    "f": "\f",
    "0": "\0",
}
_ESCAPE_MAP = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\t": "\\t",
    "\r": "\\r",
    "\b": "\\b",
    "\f": "\\f",
}


def _unescape_string(s: str) -> str:
    if "\\" not in s:
        return s
    out: list[str] = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            if nxt == "u" and i + 6 <= len(s):
                try:
                    out.append(chr(int(s[i + 2 : i + 6], 16)))
                    i += 6
                    continue
                except ValueError:
                    pass
            if nxt in _UNESCAPE_MAP:
                out.append(_UNESCAPE_MAP[nxt])
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def _escape_string(s: str) -> str:
    out: list[str] = []
    for ch in s:
        if ch in _ESCAPE_MAP:
            out.append(_ESCAPE_MAP[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def _parse_instruction(raw: str, stripped: str, lineno: int) -> Instruction:
    # Lines that look like an interpreted family but fail its grammar fall
    # back to opaque; only directives raise.
    if stripped.startswith("invoke-"):
        m = _INVOKE_RE.match(stripped)
        if m:
            kind, cls, name, proto = m.groups()
            if _CLASS_DESC_RE.match(cls):
                return Invoke(kind, MethodRef(cls, name, proto), lineno, raw)
    elif stripped.startswith("const-string"):
        m = _CONST_STRING_RE.match(stripped)
        if m:
            return StringConst(_unescape_string(m.group(1)), lineno, raw)
    elif stripped.startswith("new-instance"):
        m = _NEW_INSTANCE_RE.match(stripped)
        if m:
            return NewInstance(m.group(1), lineno, raw)
    return Opaque(raw, lineno)


def _parse_method_directive(stripped: str, lineno: int) -> tuple[list[str], str, str]:
    tokens = stripped.split()
    if len(tokens) < 2:
        raise MalformedDirectiveError("missing method signature in .method", lineno)
    sig = _METHOD_SIG_RE.match(tokens[-1])
    if not sig:
        raise MalformedDirectiveError(f"bad method signature {tokens[-1]!r}", lineno)
    return tokens[1:-1], sig.group(1), sig.group(2)


def parse_class(text: str, source_file: str = "") -> ClassDef:
    """Parse one smali class file into a ClassDef.

    Raises MalformedDirectiveError, UnterminatedMethodError, or
    DuplicateMethodError, each carrying the offending line number.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    descriptor: str | None = None
    super_descriptor = ""
    class_flags: list[str] = []
    metadata: list[str] = []
    methods: list[MethodDef] = []
    seen_methods: set[tuple[str, str]] = set()

    cur: tuple[list[str], str, str, int] | None = None  # flags, name, proto, line
    body: list[Instruction] = []

    for idx, raw in enumerate(lines):
        lineno = idx + 1
        stripped = raw.strip()

        if cur is not None:
            if stripped == ".end method":
                flags, name, proto, _ = cur
                methods.append(MethodDef(descriptor or "", name, proto, flags, body))
                cur = None
                body = []
            elif stripped.split(maxsplit=1)[:1] == [".method"]:
                raise UnterminatedMethodError(
                    f".method {cur[1]}{cur[2]} (line {cur[3]}) not closed before next .method",
                    lineno,
                )
            else:
                body.append(_parse_instruction(raw, stripped, lineno))
            continue

        if not stripped:
            continue
        head = stripped.split(maxsplit=1)[0]
        if head == ".class":
            if descriptor is not None:
                raise MalformedDirectiveError("duplicate .class directive", lineno)
            tokens = stripped.split()
            if len(tokens) < 2:
                raise MalformedDirectiveError("missing class descriptor in .class", lineno)
            if not _CLASS_DESC_RE.match(tokens[-1]):
                raise MalformedDirectiveError(f"bad class descriptor {tokens[-1]!r}", lineno)
            descriptor = tokens[-1]
            class_flags = tokens[1:-1]
        elif head == ".super":
            tokens = stripped.split()
            if len(tokens) != 2 or not _CLASS_DESC_RE.match(tokens[1]):
                raise MalformedDirectiveError("bad .super directive", lineno)
            if super_descriptor:
                raise MalformedDirectiveError("duplicate .super directive", lineno)
            super_descriptor = tokens[1]
        elif head == ".method":
            if descriptor is None:
                raise MalformedDirectiveError(".method before .class", lineno)
            flags, name, proto = _parse_method_directive(stripped, lineno)
            if (name, proto) in seen_methods:
                raise DuplicateMethodError(f"duplicate method {name}{proto}", lineno)
            seen_methods.add((name, proto))
            cur = (flags, name, proto, lineno)
            body = []
        elif stripped == ".end method":
            raise MalformedDirectiveError(".end method outside a method", lineno)
        else:
            metadata.append(raw)

    if cur is not None:
        raise UnterminatedMethodError(
            f".method {cur[1]}{cur[2]} has no matching .end method", cur[3]
        )
    if descriptor is None:
        raise MalformedDirectiveError("no .class directive found", 1)
    return ClassDef(descriptor, super_descriptor, class_flags, metadata, methods, source_file)


def parse_app_dir(root: str | Path, app_id: str) -> tuple[AppModel, list[str]]:
    """Parse every ``*.smali`` file under ``root`` (recursively) into an AppModel.

    Files that fail to parse are skipped and reported in the returned
    diagnostics list; classes are ordered by relative path so repeated runs
    produce identical models. Raises DuplicateClassError when two files
    declare the same descriptor, and OSError when root is unreadable.
    """
    root = Path(root)
    if not root.exists():
        raise FileNotFoundError(f"app directory not found: {root}")
    if not root.is_dir():
        raise NotADirectoryError(f"not a directory: {root}")

    paths = sorted(root.rglob(f"*{SMALI_EXTENSION}"), key=lambda p: p.relative_to(root).as_posix())
    classes: list[ClassDef] = []
    diagnostics: list[str] = []
    seen: dict[str, str] = {}
    for path in paths:
        rel = path.relative_to(root).as_posix()
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            diagnostics.append(f"{rel}: unreadable: {exc}")
            continue
        try:
            cls = parse_class(text, source_file=rel)
        except SmaliParseError as exc:
            diagnostics.append(f"{rel}: {exc}")
            continue
        if cls.descriptor in seen:
            raise DuplicateClassError(
                f"class {cls.descriptor} declared in both {seen[cls.descriptor]} and {rel}"
            )
        seen[cls.descriptor] = rel
        classes.append(cls)
    return AppModel(app_id, classes), diagnostics


def _render_instruction(ins: Instruction) -> str:
    if isinstance(ins, Opaque):
        return ins.raw_line
    if ins.raw_line is not None:
        return ins.raw_line
    if isinstance(ins, Invoke):
        t = ins.target
        return f"    invoke-{ins.kind} {{}}, {t.class_descriptor}->{t.name}{t.proto}"
    if isinstance(ins, StringConst):
        return f'    const-string v0, "{_escape_string(ins.value)}"'
    return f"    new-instance v0, {ins.type_descriptor}"


def render_class(cls: ClassDef) -> str:
    """Emit smali text whose re-parse is structurally identical to ``cls``."""
    parts = [" ".join([".class", *cls.flags, cls.descriptor])]
    if cls.super_descriptor:
        parts.append(f".super {cls.super_descriptor}")
    parts.extend(cls.metadata)
    for m in cls.methods:
        parts.append("")
        parts.append(" ".join([".method", *m.flags, f"{m.name}{m.proto}"]))
        parts.extend(_render_instruction(ins) for ins in m.body)
        parts.append(".end method")
    return "\n".join(parts) + "\n"
