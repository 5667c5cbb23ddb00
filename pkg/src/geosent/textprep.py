"""Text cleaning ahead of sentiment classification.

Strips URLs (scheme-prefixed and bare-domain), @-mentions, emoji and
other pictographic code points, then lowercases, tokenizes, and removes
configured stop words and search keywords (the keywords appear in every
post by construction, so they carry no signal). Documents whose
remaining tokens hold fewer than five characters in total are dropped
as noise residue.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import InputError

_URL_SCHEME_RE = re.compile(r"(?:https?|ftp)://\S+", re.IGNORECASE)
_URL_BARE_RE = re.compile(
    r"\b(?:[a-z0-9][a-z0-9-]*\.)+"
    r"(?:com|net|org|no|io|co|gov|edu|info|me|tv|ly|be)\b(?:/\S*)?",
    re.IGNORECASE,
)
_MENTION_RE = re.compile(r"@\w+")
_WORD_RE = re.compile(r"\w+", re.UNICODE)

# Unicode Extended_Pictographic ranges (merged), plus the skin-tone
# modifiers, regional-indicator (flag) pairs, and variation selectors.
_PICTO_RANGES: tuple[tuple[int, int], ...] = (
    (0x00A9, 0x00A9),
    (0x00AE, 0x00AE),
    (0x200D, 0x200D),
    (0x203C, 0x203C),
    (0x2049, 0x2049),
    (0x20E3, 0x20E3),
    (0x2122, 0x2122),
    (0x2139, 0x2139),
    (0x2194, 0x2199),
    (0x21A9, 0x21AA),
    (0x231A, 0x231B),
    (0x2328, 0x2328),
    (0x23CF, 0x23CF),
    (0x23E9, 0x23F3),
    (0x23F8, 0x23FA),
    (0x24C2, 0x24C2),
    (0x25AA, 0x25AB),
    (0x25B6, 0x25B6),
    (0x25C0, 0x25C0),
    (0x25FB, 0x25FE),
    (0x2600, 0x2605),
    (0x2607, 0x2612),
    (0x2614, 0x2685),
    (0x2690, 0x2705),
    (0x2708, 0x2712),
    (0x2714, 0x2714),
    (0x2716, 0x2716),
    (0x271D, 0x271D),
    (0x2721, 0x2721),
    (0x2728, 0x2728),
    (0x2733, 0x2734),
    (0x2744, 0x2744),
    (0x2747, 0x2747),
    (0x274C, 0x274C),
    (0x274E, 0x274E),
    (0x2753, 0x2755),
    (0x2757, 0x2757),
    (0x2763, 0x2767),
    (0x2795, 0x2797),
    (0x27A1, 0x27A1),
    (0x27B0, 0x27B0),
    (0x27BF, 0x27BF),
    (0x2934, 0x2935),
    (0x2B05, 0x2B07),
    (0x2B1B, 0x2B1C),
    (0x2B50, 0x2B50),
    (0x2B55, 0x2B55),
    (0x3030, 0x3030),
    (0x303D, 0x303D),
    (0x3297, 0x3297),
    (0x3299, 0x3299),
    (0xFE00, 0xFE0F),
    (0x1F000, 0x1F0FF),
    (0x1F10D, 0x1F10F),
    (0x1F12F, 0x1F12F),
    (0x1F16C, 0x1F171),
    (0x1F17E, 0x1F17F),
    (0x1F18E, 0x1F18E),
    (0x1F191, 0x1F19A),
    (0x1F1AD, 0x1F1FF),
    (0x1F201, 0x1F20F),
    (0x1F21A, 0x1F21A),
    (0x1F22F, 0x1F22F),
    (0x1F232, 0x1F23A),
    (0x1F23C, 0x1F23F),
    (0x1F249, 0x1F3FF),
    (0x1F400, 0x1F53D),
    (0x1F546, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F774, 0x1F77F),
    (0x1F7D5, 0x1F7FF),
    (0x1F80C, 0x1F80F),
    (0x1F848, 0x1F84F),
    (0x1F85A, 0x1F85F),
    (0x1F888, 0x1F88F),
    (0x1F8AE, 0x1F8FF),
    (0x1F90C, 0x1F93A),
    (0x1F93C, 0x1F945),
    (0x1F947, 0x1FAFF),
    (0x1FC00, 0x1FFFD),
)
_RANGE_STARTS = [lo for lo, _ in _PICTO_RANGES]

MIN_CLEAN_CHARS = 5


def is_pictographic(ch: str) -> bool:
    cp = ord(ch)
    idx = bisect_right(_RANGE_STARTS, cp) - 1
    return idx >= 0 and cp <= _PICTO_RANGES[idx][1]


def fold_text(text: str) -> str:
    """Length-preserving lowercase.

    A handful of code points expand under str.lower/casefold (ß, the
    dotted capital I); taking the first mapped character keeps cleaned
    length bounded by raw length, which downstream accounting relies on.
    """
    return "".join(ch.lower()[0] if len(ch.lower()) > 1 else ch.lower() for ch in text)


def _strip_pictographs(text: str) -> str:
    return "".join(ch for ch in text if not is_pictographic(ch))


@dataclass(frozen=True)
class CleanedDocument:
    post_id: str
    tokens: tuple[str, ...]
    raw_length: int
    clean_length: int

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def to_json_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            "tokens": list(self.tokens),
            "raw_length": self.raw_length,
            "clean_length": self.clean_length,
        }


def clean(
    text: str,
    stopwords: frozenset[str] | set[str],
    keywords: frozenset[str] | set[str],
    post_id: str = "",
) -> Optional[CleanedDocument]:
    """Clean one post; None means dropped (under 5 characters remain).

    The 5-character minimum counts token characters only, not
    separators, the strictest reading of the length rule.
    """
    raw_length = len(text)
    s = _URL_SCHEME_RE.sub(" ", text)
    s = _URL_BARE_RE.sub(" ", s)
    s = _MENTION_RE.sub(" ", s)
    s = _strip_pictographs(s)
    s = fold_text(s)
    tokens = [t for t in _WORD_RE.findall(s) if t not in stopwords and t not in keywords]
    core = sum(len(t) for t in tokens)
    if core < MIN_CLEAN_CHARS:
        return None
    clean_length = core + max(len(tokens) - 1, 0)
    return CleanedDocument(
        post_id=post_id,
        tokens=tuple(tokens),
        raw_length=raw_length,
        clean_length=clean_length,
    )


def load_terms(path: str | Path) -> frozenset[str]:
    """Load a one-term-per-line UTF-8 word list, case-folded."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read term file {path}: {exc}") from exc
    return frozenset(fold_text(line.strip()) for line in raw.splitlines() if line.strip())


def default_stopwords_path() -> Path:
    return Path(__file__).parent / "data" / "stopwords_no.txt"


def load_default_stopwords() -> frozenset[str]:
    return load_terms(default_stopwords_path())
