"""Character policy: the Persian whitelist, Arabic-to-Persian unification, rule files.

Rule file syntax (UTF-8, one directive per line, ``#`` starts a comment)::

    no_defaults                  # only valid as the first directive
    allow U+0627                 # single codepoint
    allow U+06F0..U+06F9         # inclusive range
    allow 'آ'                    # literal character in quotes
    sub U+064A U+06CC            # substitute source with replacement
    min_tokens 3                 # also accepted: min_tokens = 3

Without ``no_defaults`` every directive is merged on top of :func:`default_ruleset`.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

from .errors import RuleFileSyntaxError, RuleSetError

SPACE = 0x0020
ZWNJ = 0x200C

# ا ب پ ت ث ج چ ح خ د ذ ر ز ژ س ش ص ض ط ظ ع غ ف ق ک گ ل م ن و ه ی
PERSIAN_LETTERS = "ابپتثجچحخدذرزژسشصضطظعغفقکگلمنوهی"
# Arabic letters common in Persian text. Everything here except U+06C7 is also a substitution source.
ARABIC_EXTRAS = "يێةۀكإڒۆۇ"
SYMBOLS = ".?-,؟،؛"

DEFAULT_SUBSTITUTIONS = {
    0x064A: 0x06CC,  # ي -> ی
    0x06CE: 0x06CC,  # ێ -> ی
    0x0629: 0x0647,  # ة -> ه
    0x06C0: 0x0647,  # ۀ -> ه
    0x0643: 0x06A9,  # ك -> ک
    0x0625: 0x0627,  # إ -> ا
    0x0692: 0x0631,  # ڒ -> ر
    0x06C6: 0x0648,  # ۆ -> و
}
DEFAULT_MIN_TOKENS = 2

# Line structure characters; allowing them would let a "line" span lines.
_NEVER_ALLOWED = {0x000A: "LF", 0x000D: "CR", 0x0009: "TAB"}


def _fmt(cp: int) -> str:
    return f"U+{cp:04X}"


@dataclass(frozen=True)
class RuleSet:
    allowed: frozenset = field(default_factory=frozenset)
    substitutions: Mapping[int, int] = field(default_factory=dict)
    min_tokens: int = DEFAULT_MIN_TOKENS

    def __post_init__(self):
        object.__setattr__(self, "allowed", frozenset(int(c) for c in self.allowed))
        object.__setattr__(self, "substitutions", {int(k): int(v) for k, v in self.substitutions.items()})
        self._validate()

    def _validate(self):
        if not isinstance(self.min_tokens, int) or self.min_tokens < 0:
            raise RuleSetError(f"min_tokens must be a non-negative integer, got {self.min_tokens!r}")
        for cp in self.allowed:
            if not 0 <= cp <= 0x10FFFF or 0xD800 <= cp <= 0xDFFF:
                raise RuleSetError(f"{cp:#x} is not a Unicode scalar value")
            if cp in _NEVER_ALLOWED:
                raise RuleSetError(f"{_fmt(cp)} ({_NEVER_ALLOWED[cp]}) cannot be allowed")
        for cp in (SPACE, ZWNJ):
            if cp not in self.allowed:
                raise RuleSetError(f"{_fmt(cp)} must be in the allowed set")
        for src, dst in self.substitutions.items():
            if src == dst:
                raise RuleSetError(f"substitution {_fmt(src)} maps to itself")
            if src not in self.allowed:
                raise RuleSetError(f"substitution source {_fmt(src)} is not in the allowed set")
            if dst not in self.allowed:
                raise RuleSetError(f"substitution replacement {_fmt(dst)} is not in the allowed set")
            if dst in self.substitutions:
                raise RuleSetError(f"substitution replacement {_fmt(dst)} is itself a substitution source")
            if SPACE in (src, dst) or ZWNJ in (src, dst):
                raise RuleSetError(f"substitution {_fmt(src)} -> {_fmt(dst)} touches a word separator")

    def __hash__(self):
        return hash(self.fingerprint)

    @property
    def fingerprint(self) -> str:
        fp = self.__dict__.get("_fingerprint")
        if fp is None:
            fp = hashlib.sha256(serialize(self).encode("utf-8")).hexdigest()
            object.__setattr__(self, "_fingerprint", fp)
        return fp

    def ranges(self) -> list[tuple[int, int]]:
        """Allowed codepoints as sorted inclusive ``(lo, hi)`` ranges."""
        out: list[tuple[int, int]] = []
        for cp in sorted(self.allowed):
            if out and cp == out[-1][1] + 1:
                out[-1] = (out[-1][0], cp)
            else:
                out.append((cp, cp))
        return out

    def with_min_tokens(self, n: int) -> "RuleSet":
        return replace(self, min_tokens=n)


def default_ruleset() -> RuleSet:
    allowed = {ord(c) for c in PERSIAN_LETTERS + ARABIC_EXTRAS + SYMBOLS}
    allowed |= {ZWNJ, SPACE}
    return RuleSet(frozenset(allowed), dict(DEFAULT_SUBSTITUTIONS), DEFAULT_MIN_TOKENS)


def _cp(c) -> int:
    return c if isinstance(c, int) else ord(c)


def is_allowed(cp, rules: RuleSet) -> bool:
    return _cp(cp) in rules.allowed


def substitute(cp, rules: RuleSet):
    """Map a codepoint (int or 1-char str) through the substitution table; same type out."""
    out = rules.substitutions.get(_cp(cp), _cp(cp))
    return out if isinstance(cp, int) else chr(out)


def serialize(rules: RuleSet) -> str:
    """Canonical rule-file text; ``load_ruleset`` of it reproduces ``rules`` exactly."""
    lines = ["no_defaults"]
    for lo, hi in rules.ranges():
        lines.append(f"allow {_fmt(lo)}" if lo == hi else f"allow {_fmt(lo)}..{_fmt(hi)}")
    for src in sorted(rules.substitutions):
        lines.append(f"sub {_fmt(src)} {_fmt(rules.substitutions[src])}")
    lines.append(f"min_tokens {rules.min_tokens}")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(r"""'([^\n])'|"([^\n])"|(#.*)|([^\s'"#]+)|(\S)""")
_UPLUS = re.compile(r"[Uu]\+([0-9A-Fa-f]{4,6})")


def _tokenize(line: str) -> list:
    """Split a directive line into words; quoted characters come back as ints."""
    out: list = []
    for m in _TOKEN.finditer(line):
        q1, q2, comment, bare, stray = m.groups()
        if comment is not None:
            break
        if stray is not None:
            raise ValueError(f"unexpected {stray!r}")
        if bare is None:
            out.append(ord(q1 if q1 is not None else q2))
            continue
        # "U+0600..U+06FF" -> ["U+0600", "..", "U+06FF"]
        for i, piece in enumerate(bare.split("..")):
            if i:
                out.append("..")
            if piece:
                out.append(piece)
    return out


def _codepoint(word) -> int:
    if isinstance(word, int):
        return word
    m = _UPLUS.fullmatch(word)
    if not m:
        raise ValueError(f"expected a codepoint (U+XXXX or a quoted character), got {word!r}")
    cp = int(m.group(1), 16)
    if cp > 0x10FFFF or 0xD800 <= cp <= 0xDFFF:
        raise ValueError(f"{word} is not a Unicode scalar value")
    return cp


def parse_rules(text: str, path: str = "<string>", base: RuleSet | None = None) -> RuleSet:
    allowed: set[int] | None = None
    subs: dict[int, int] = {}
    min_tokens: int | None = None
    seen_directive = False
    no_defaults = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        try:
            words = _tokenize(raw)
        except ValueError as exc:
            raise RuleFileSyntaxError(path, lineno, str(exc)) from None
        if not words:
            continue
        head, args = words[0], words[1:]
        try:
            if head == "no_defaults":
                if seen_directive:
                    raise ValueError("no_defaults must be the first directive")
                if args:
                    raise ValueError("no_defaults takes no arguments")
                no_defaults = True
            elif head == "allow":
                if len(args) == 1:
                    lo = hi = _codepoint(args[0])
                elif len(args) == 3 and args[1] == "..":
                    lo, hi = _codepoint(args[0]), _codepoint(args[2])
                    if hi < lo:
                        raise ValueError(f"empty range {_fmt(lo)}..{_fmt(hi)}")
                else:
                    raise ValueError("usage: allow U+XXXX[..U+YYYY]")
                if allowed is None:
                    allowed = set()
                allowed.update(range(lo, hi + 1))
            elif head == "sub":
                if len(args) != 2:
                    raise ValueError("usage: sub U+XXXX U+YYYY")
                subs[_codepoint(args[0])] = _codepoint(args[1])
            elif head == "min_tokens":
                if args[:1] == ["="]:
                    args = args[1:]
                if len(args) != 1 or not isinstance(args[0], str) or not args[0].isdigit():
                    raise ValueError("usage: min_tokens N")
                min_tokens = int(args[0])
            else:
                raise ValueError(f"unknown directive {head!r}")
        except ValueError as exc:
            raise RuleFileSyntaxError(path, lineno, str(exc)) from None
        seen_directive = True

    if no_defaults:
        base = None
    elif base is None:
        base = default_ruleset()
    merged_allowed = set(base.allowed) if base is not None else {SPACE, ZWNJ}
    merged_allowed |= allowed or set()
    merged_subs = dict(base.substitutions) if base is not None else {}
    merged_subs.update(subs)
    if min_tokens is None:
        min_tokens = base.min_tokens if base is not None else DEFAULT_MIN_TOKENS
    return RuleSet(frozenset(merged_allowed), merged_subs, min_tokens)


def load_ruleset(path) -> RuleSet:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_rules(text, str(path))


def ruleset_from_chars(chars: Iterable[str], substitutions: Mapping[str, str] = (), min_tokens: int = 2) -> RuleSet:
    """Convenience constructor from literal characters; space and ZWNJ are always added."""
    allowed = {ord(c) for c in chars} | {SPACE, ZWNJ}
    subs = {ord(k): ord(v) for k, v in dict(substitutions).items()}
    return RuleSet(frozenset(allowed), subs, min_tokens)
