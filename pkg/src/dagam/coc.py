"""Character order change (COC): scramble word interiors, endpoints fixed.

The modification pass segments a sentence into whitespace tokens, picks a
random share of them, and permutes the interior characters of each picked
word while its first and last characters stay put. Punctuation stuck to a
word is preserved: scrambling applies to the alphabetic core only.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass

_TOKEN_RE = re.compile(r"\S+")

# Below this core length there is no interior to permute.
_SCRAMBLE_MIN = 4


@dataclass(frozen=True)
class CocParams:
    """Knobs for the modification pass."""

    selection_rate: float = 0.2
    min_word_len: int = 4
    max_retries: int = 3

    def __post_init__(self) -> None:
        if not 0 < self.selection_rate <= 1:
            raise ValueError(f"selection_rate must be in (0, 1], got {self.selection_rate}")
        if self.min_word_len < 3:
            raise ValueError("min_word_len must be >= 3; shorter words have no interior")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class TokenSpan:
    """A word unit and its character offsets in the source sentence."""

    start: int
    end: int
    surface: str


def segment_words(text: str) -> list[TokenSpan]:
    """Split on maximal whitespace runs, keeping character offsets."""
    return [TokenSpan(m.start(), m.end(), m.group()) for m in _TOKEN_RE.finditer(text)]


def alpha_core(token: str) -> tuple[str, str, str]:
    """Split a token into (prefix, alphabetic-bounded core, suffix).

    The core is what remains after stripping leading and trailing
    non-alphabetic characters; it may be empty ("123" -> ("123", "", "")).
    prefix + core + suffix always equals the token.
    """
    start, end = 0, len(token)
    while start < end and not token[start].isalpha():
        start += 1
    while end > start and not token[end - 1].isalpha():
        end -= 1
    return token[:start], token[start:end], token[end:]


def select_tokens(n_tokens: int, rate: float, rng: random.Random) -> set[int]:
    """Pick max(1, floor(rate * n)) distinct indices, uniformly.

    Empty for n_tokens == 0. The epsilon guards IEEE droop on exact
    multiples (0.3 * 10 == 2.999...96) so the mathematical floor wins.
    """
    if n_tokens <= 0:
        return set()
    count = max(1, math.floor(rate * n_tokens + 1e-9))
    return set(rng.sample(range(n_tokens), min(count, n_tokens)))


def scramble_word(core: str, max_retries: int, rng: random.Random) -> str:
    """Permute the interior characters, first and last fixed.

    Cores shorter than 4 pass through (no interior to move). When the
    drawn permutation reproduces the input and the interior has at least
    two distinct characters, redraw up to max_retries times, then accept
    whatever resulted. Length and character multiset are always preserved.
    """
    if len(core) < _SCRAMBLE_MIN:
        return core
    original = core[1:-1]
    interior = list(original)
    if len(set(interior)) < 2:
        return core
    for _ in range(max_retries + 1):
        rng.shuffle(interior)
        if "".join(interior) != original:
            break
    return core[0] + "".join(interior) + core[-1]


def apply_coc(text: str, params: CocParams, rng: random.Random) -> str:
    """Scramble a random sample of a sentence's words.

    Selection runs over all tokens first; the min_word_len filter then
    gates which selected tokens actually scramble, so an ineligible pick
    consumes its slot. Tokens are rejoined with single spaces.
    """
    tokens = [span.surface for span in segment_words(text)]
    if not tokens:
        return ""
    selected = select_tokens(len(tokens), params.selection_rate, rng)
    out = []
    for idx, token in enumerate(tokens):
        if idx in selected:
            prefix, core, suffix = alpha_core(token)
            if len(core) >= params.min_word_len:
                token = prefix + scramble_word(core, params.max_retries, rng) + suffix
        out.append(token)
    return " ".join(out)


def is_coc_image(source_token: str, candidate: str) -> bool:
    """True when candidate is source_token or a legal scramble of it.

    Used by the output validator: same punctuation shell, same core
    length and endpoints, same character multiset. Cores shorter than 4
    only admit the identity.
    """
    if candidate == source_token:
        return True
    prefix, core, suffix = alpha_core(source_token)
    cand_prefix, cand_core, cand_suffix = alpha_core(candidate)
    if (prefix, suffix) != (cand_prefix, cand_suffix):
        return False
    if len(core) != len(cand_core) or len(core) < _SCRAMBLE_MIN:
        return False
    return (
        core[0] == cand_core[0]
        and core[-1] == cand_core[-1]
        and sorted(core) == sorted(cand_core)
    )
