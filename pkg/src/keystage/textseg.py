"""Deterministic text segmentation: tokens, sentences, paragraphs, chunks.

Everything downstream (features, curriculum signals, reports) consumes the
structures built here, so the rules are fixed and rule-based on purpose:
the same input must always produce the same segmentation.

Tokenization
    A word is a maximal run of Unicode letters/digits, optionally joined by
    internal apostrophes or hyphens ("don't", "well-known"). Every other
    non-whitespace character becomes a single-character token, classified as
    punctuation (Unicode category P*) or other. Tokens carry [start, end)
    character offsets into the source text.

Sentence splitting
    A sentence ends at '.', '!' or '?' unless the mark is suppressed:
    - the previous word is a known abbreviation ("Mr.", "etc.");
    - the previous word is a single uppercase letter (a personal initial);
    - the mark is glued to the next character with no whitespace and that
      character is alphanumeric ("3.14", "e.g.").
    Adjacent closing quotes/brackets and repeated terminators ("...", "?!")
    attach to the sentence they close. Paragraph breaks (blank lines) always
    force a sentence break.

Syllables
    Maximal groups of a/e/i/o/u/y count one each; a terminal lone 'e' not
    preceded by 'l' is silent; every word counts at least one syllable.

Chunking
    Whole sentences are packed greedily into chunks of at most
    ``token_budget`` tokens. A single sentence longer than the budget
    becomes its own chunk and is flagged oversized rather than split
    mid-sentence. Chunk source spans tile the document exactly.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

WORD_RE = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*")
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")
_PARAGRAPH_RE = re.compile(r"\n[ \t\x0b\f\r]*\n[\s]*")
_NONLETTER_RE = re.compile(r"[^a-z]")

SENTENCE_TERMINATORS = frozenset({".", "!", "?", "…"})

# Marks that may trail a terminator and still belong to the closing sentence.
_CLOSERS = frozenset({'"', "'", "’", "”", ")", "]", "}"})

# Lowercase abbreviations whose trailing period never ends a sentence.
ABBREVIATIONS = frozenset({
    "mr", "mrs", "ms", "dr", "st", "prof", "rev", "fr", "gen", "col",
    "capt", "lt", "sgt", "maj", "jr", "sr", "hon", "messrs", "mme",
    "etc", "vs", "viz", "cf", "al", "esq", "vol", "no", "fig", "ed",
    "pp", "ch", "sec", "dept", "univ", "assn", "inc", "ltd", "co",
})


@dataclass(frozen=True)
class Token:
    """One token with its source span. char_count counts alphanumerics only."""

    surface: str
    kind: str  # "word" | "punctuation" | "other"
    start: int
    end: int
    char_count: int
    syllables: int

    @property
    def is_word(self) -> bool:
        return self.kind == "word"


@dataclass(frozen=True)
class SegmentedText:
    """Tokens plus sentence/paragraph structure over one span of source text.

    sentence_bounds are half-open [start, end) token index ranges; they are
    non-overlapping, in order, and cover every token. paragraph_bounds are
    half-open ranges over sentence indices with the same properties.
    """

    tokens: tuple[Token, ...]
    sentence_bounds: tuple[tuple[int, int], ...]
    paragraph_bounds: tuple[tuple[int, int], ...]
    source_span: tuple[int, int]

    def sentence_tokens(self, index: int) -> tuple[Token, ...]:
        lo, hi = self.sentence_bounds[index]
        return self.tokens[lo:hi]

    def word_tokens(self) -> tuple[Token, ...]:
        return tuple(t for t in self.tokens if t.is_word)

    @property
    def sentence_count(self) -> int:
        return len(self.sentence_bounds)

    @property
    def paragraph_count(self) -> int:
        return len(self.paragraph_bounds)


@dataclass(frozen=True)
class Chunk:
    """A run of whole sentences fitting a token budget."""

    segmented: SegmentedText
    index: int
    token_budget: int
    oversized: bool = False

    @property
    def token_count(self) -> int:
        return len(self.segmented.tokens)


def count_syllables(word: str) -> int:
    """Syllable estimate for one word; always at least 1.

    >>> [count_syllables(w) for w in ("cat", "beautiful", "strengths", "make", "table")]
    [1, 3, 1, 1, 2]
    """
    letters = _NONLETTER_RE.sub("", word.lower())
    groups = _VOWEL_GROUP_RE.findall(letters)
    count = len(groups)
    if count > 1 and letters.endswith("e") and not letters.endswith("le") and groups[-1] == "e":
        count -= 1
    return max(count, 1)


def _classify_mark(ch: str) -> str:
    return "punctuation" if unicodedata.category(ch).startswith("P") else "other"


def tokenize(text: str) -> list[Token]:
    """Split text into word and mark tokens with source offsets."""
    tokens: list[Token] = []
    idx = 0
    n = len(text)
    matches = WORD_RE.finditer(text)
    nxt = next(matches, None)
    while idx < n:
        if nxt is not None and idx == nxt.start():
            surface = nxt.group()
            tokens.append(
                Token(
                    surface=surface,
                    kind="word",
                    start=idx,
                    end=nxt.end(),
                    char_count=sum(c.isalnum() for c in surface),
                    syllables=count_syllables(surface),
                )
            )
            idx = nxt.end()
            nxt = next(matches, None)
            continue
        ch = text[idx]
        if not ch.isspace():
            tokens.append(
                Token(
                    surface=ch,
                    kind=_classify_mark(ch),
                    start=idx,
                    end=idx + 1,
                    char_count=0,
                    syllables=0,
                )
            )
        idx += 1
    return tokens


def _suppressed_terminator(text: str, tokens: list[Token], i: int) -> bool:
    """True when tokens[i] is a terminator mark that does not end a sentence."""
    tok = tokens[i]
    # Glued to following alphanumeric text: decimal point or dotted abbreviation.
    if tok.end < len(text) and text[tok.end].isalnum():
        return True
    if tok.surface != ".":
        return False
    if i == 0:
        return False
    prev = tokens[i - 1]
    if not prev.is_word or prev.end != tok.start:
        return False
    if len(prev.surface) == 1 and prev.surface.isupper():
        return True
    return prev.surface.lower() in ABBREVIATIONS


def split_sentences(text: str, tokens: list[Token]) -> list[tuple[int, int]]:
    """Half-open token ranges, one per sentence, covering all tokens."""
    bounds: list[tuple[int, int]] = []
    start = 0
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if (
            tok.kind == "punctuation"
            and tok.surface in SENTENCE_TERMINATORS
            and not _suppressed_terminator(text, tokens, i)
        ):
            j = i + 1
            # Absorb glued terminator runs ("...", "?!") and closing marks.
            while (
                j < n
                and tokens[j].kind == "punctuation"
                and tokens[j].start == tokens[j - 1].end
                and tokens[j].surface in SENTENCE_TERMINATORS | _CLOSERS
            ):
                j += 1
            bounds.append((start, j))
            start = j
            i = j
            continue
        i += 1
    if start < n:
        bounds.append((start, n))
    return bounds


def _shift(token: Token, offset: int) -> Token:
    return Token(
        surface=token.surface,
        kind=token.kind,
        start=token.start + offset,
        end=token.end + offset,
        char_count=token.char_count,
        syllables=token.syllables,
    )


def segment_text(text: str, base_offset: int = 0) -> SegmentedText:
    """Full segmentation of one document or excerpt.

    Paragraphs are blank-line separated blocks; each block is tokenized and
    sentence-split independently, so a paragraph break is always a sentence
    break. Token offsets refer to positions in ``text`` plus ``base_offset``.
    """
    tokens: list[Token] = []
    sentence_bounds: list[tuple[int, int]] = []
    paragraph_bounds: list[tuple[int, int]] = []
    cursor = 0
    for match in list(_PARAGRAPH_RE.finditer(text)) + [None]:
        block_end = match.start() if match is not None else len(text)
        block = text[cursor:block_end]
        block_tokens = tokenize(block)
        if block_tokens:
            token_base = len(tokens)
            sent_base = len(sentence_bounds)
            tokens.extend(_shift(t, cursor + base_offset) for t in block_tokens)
            for lo, hi in split_sentences(block, block_tokens):
                sentence_bounds.append((token_base + lo, token_base + hi))
            paragraph_bounds.append((sent_base, len(sentence_bounds)))
        cursor = match.end() if match is not None else block_end
    return SegmentedText(
        tokens=tuple(tokens),
        sentence_bounds=tuple(sentence_bounds),
        paragraph_bounds=tuple(paragraph_bounds),
        source_span=(base_offset, base_offset + len(text)),
    )


def _slice_segment(
    seg: SegmentedText,
    sent_lo: int,
    sent_hi: int,
    span: tuple[int, int],
) -> SegmentedText:
    """Rebuild a SegmentedText from a contiguous sentence range of ``seg``."""
    tok_lo = seg.sentence_bounds[sent_lo][0]
    tok_hi = seg.sentence_bounds[sent_hi - 1][1]
    tokens = seg.tokens[tok_lo:tok_hi]
    sentence_bounds = tuple(
        (lo - tok_lo, hi - tok_lo) for lo, hi in seg.sentence_bounds[sent_lo:sent_hi]
    )
    paragraph_bounds = []
    for plo, phi in seg.paragraph_bounds:
        lo = max(plo, sent_lo)
        hi = min(phi, sent_hi)
        if lo < hi:
            paragraph_bounds.append((lo - sent_lo, hi - sent_lo))
    return SegmentedText(
        tokens=tokens,
        sentence_bounds=sentence_bounds,
        paragraph_bounds=tuple(paragraph_bounds),
        source_span=span,
    )


def chunk_document(text: str, token_budget: int = 512) -> list[Chunk]:
    """Pack whole sentences into chunks of at most ``token_budget`` tokens.

    Sentences accumulate greedily in order. A sentence that alone exceeds
    the budget becomes its own oversized chunk. Chunk source spans tile
    ``text`` exactly: each chunk starts where the previous one ended, the
    first at 0, the last ending at len(text).
    """
    if token_budget < 1:
        raise ValueError(f"token_budget must be positive, got {token_budget}")
    seg = segment_text(text)
    if not seg.tokens:
        return []

    groups: list[tuple[int, int]] = []  # sentence index ranges
    lo = 0
    count = 0
    for si, (slo, shi) in enumerate(seg.sentence_bounds):
        size = shi - slo
        if count > 0 and count + size > token_budget:
            groups.append((lo, si))
            lo = si
            count = 0
        count += size
    groups.append((lo, len(seg.sentence_bounds)))

    chunks: list[Chunk] = []
    cursor = 0
    for index, (sent_lo, sent_hi) in enumerate(groups):
        if index + 1 < len(groups):
            next_first_token = seg.sentence_bounds[groups[index + 1][0]][0]
            end = seg.tokens[next_first_token].start
        else:
            end = len(text)
        sub = _slice_segment(seg, sent_lo, sent_hi, (cursor, end))
        chunks.append(
            Chunk(
                segmented=sub,
                index=index,
                token_budget=token_budget,
                oversized=len(sub.tokens) > token_budget,
            )
        )
        cursor = end
    return chunks
