"""Curriculum-aligned linguistic feature counts for Key Stages 2 to 5.

Every detector is a deterministic rule over the engine's own tokens and POS
tags; there is no statistical parser, and report output labels the counts as
heuristic. All rules score one sentence at a time, so counts over a document
equal the sum of counts over chunks that split on sentence boundaries.

Keyword lists live in editable resource files under ``curriculum/ks{2..5}/``;
structural rules (clause coordination, dash and ellipsis runs, alliteration,
the "not only ... but also" pattern) are fixed here.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ResourceError, ValidationError
from .features import _DASH_MARKS, _QUOTE_MARKS
from .lexicons import FUNCTION_WORDS, Gazetteers, default_resource_dir
from .textseg import SegmentedText, Token

KS2_FEATURES = (
    "simple_sentences",
    "compound_sentences",
    "basic_punctuation",
    "dialogue",
    "narrative_indicators",
)
KS3_FEATURES = (
    "complex_sentences",
    "advanced_punctuation",
    "summarizing_indicators",
    "implied_meaning",
    "similes",
    "alliteration",
)
KS4_FEATURES = (
    "compound_complex_sentences",
    "sophisticated_punctuation",
    "evaluative_language",
    "repetition",
    "personification",
    "tone_shifts",
)
KS5_FEATURES = (
    "advanced_inference",
    "critical_analysis",
    "irony",
    "rhetorical_devices",
)

_BASIC_MARKS = frozenset({".", ",", "!", "?"})
_ADVANCED_MARKS = frozenset({":", ";", "(", ")"})
_LONG_DASHES = frozenset({"—", "–", "―", "‒"})
_CLAUSE_MARKS = frozenset({",", ";", ":"}) | _DASH_MARKS


@dataclass(frozen=True)
class CurriculumLexicon:
    """Keyword lists backing the detectors; phrases are word tuples."""

    narrative_indicators: tuple[tuple[str, ...], ...]
    subordinating_conjunctions: frozenset[str]
    summarizing_indicators: tuple[tuple[str, ...], ...]
    implied_meaning: tuple[tuple[str, ...], ...]
    evaluative_language: tuple[tuple[str, ...], ...]
    tone_shifts: frozenset[str]
    human_action_verbs: frozenset[str]
    advanced_inference: tuple[tuple[str, ...], ...]
    critical_analysis: tuple[tuple[str, ...], ...]
    contrastive_terms: frozenset[str]


@dataclass
class CurriculumFeatureCounts:
    """Per-stage feature-name -> occurrence count maps."""

    ks2: dict[str, int]
    ks3: dict[str, int]
    ks4: dict[str, int]
    ks5: dict[str, int]

    def as_flat_dict(self) -> dict[str, int]:
        flat: dict[str, int] = {}
        for stage, counts in (
            ("ks2", self.ks2),
            ("ks3", self.ks3),
            ("ks4", self.ks4),
            ("ks5", self.ks5),
        ):
            for name, value in counts.items():
                flat[f"{stage}.{name}"] = value
        return flat


def _load_phrase_list(path: Path) -> tuple[tuple[str, ...], ...]:
    if not path.is_file():
        raise ResourceError(f"curriculum list not found at {path}")
    phrases: list[tuple[str, ...]] = []
    seen: set[tuple[str, ...]] = set()
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        phrase = tuple(word.casefold() for word in line.split())
        if phrase not in seen:
            seen.add(phrase)
            phrases.append(phrase)
    if not phrases:
        raise ValidationError(f"curriculum list {path} contains no entries")
    return tuple(phrases)


def _load_word_set(path: Path) -> frozenset[str]:
    words = set()
    for phrase in _load_phrase_list(path):
        if len(phrase) != 1:
            raise ValidationError(f"{path} must hold single words, found {' '.join(phrase)!r}")
        words.add(phrase[0])
    return frozenset(words)


def load_curriculum_lexicon(directory: str | Path | None = None) -> CurriculumLexicon:
    """Load all keyword lists from ``<directory>/ks{2..5}/<feature>.txt``."""
    base = Path(directory) if directory is not None else default_resource_dir() / "curriculum"
    return CurriculumLexicon(
        narrative_indicators=_load_phrase_list(base / "ks2" / "narrative_indicators.txt"),
        subordinating_conjunctions=_load_word_set(base / "ks3" / "subordinating_conjunctions.txt"),
        summarizing_indicators=_load_phrase_list(base / "ks3" / "summarizing_indicators.txt"),
        implied_meaning=_load_phrase_list(base / "ks3" / "implied_meaning.txt"),
        evaluative_language=_load_phrase_list(base / "ks4" / "evaluative_language.txt"),
        tone_shifts=_load_word_set(base / "ks4" / "tone_shifts.txt"),
        human_action_verbs=_load_word_set(base / "ks4" / "human_action_verbs.txt"),
        advanced_inference=_load_phrase_list(base / "ks5" / "advanced_inference.txt"),
        critical_analysis=_load_phrase_list(base / "ks5" / "critical_analysis.txt"),
        contrastive_terms=_load_word_set(base / "ks5" / "contrastive_terms.txt"),
    )


def _sentences(seg: SegmentedText, tags: Sequence[str]):
    for lo, hi in seg.sentence_bounds:
        yield seg.tokens[lo:hi], tags[lo:hi]


def _word_entries(toks: Sequence[Token]) -> list[tuple[int, str]]:
    """(token index, casefolded surface) for every word token in order."""
    return [(i, t.surface.casefold()) for i, t in enumerate(toks) if t.is_word]


def _phrase_occurrences(words: Sequence[str], phrases: Iterable[tuple[str, ...]]) -> int:
    """Non-overlapping left-to-right matches, counted per phrase."""
    total = 0
    for phrase in phrases:
        n = len(phrase)
        i = 0
        while i + n <= len(words):
            if tuple(words[i : i + n]) == phrase:
                total += 1
                i += n
            else:
                i += 1
    return total


def _has_clause_coordination(toks: Sequence[Token], tags: Sequence[str]) -> bool:
    """A coordinating conjunction with a verb on each side joins clauses."""
    verbish = [tag.startswith("VB") for tag in tags]
    for i, tag in enumerate(tags):
        if tag == "CC" and any(verbish[:i]) and any(verbish[i + 1 :]):
            return True
    return False


def detect_ks2(
    seg: SegmentedText, tags: Sequence[str], lexicon: CurriculumLexicon
) -> dict[str, int]:
    """Simple/compound sentences, basic punctuation, dialogue, narrative words.

    A simple sentence has 1-10 words (a length heuristic standing in for
    clause-structure analysis); counts are independent, so a short compound
    sentence scores under both names.
    """
    counts = dict.fromkeys(KS2_FEATURES, 0)
    for toks, stags in _sentences(seg, tags):
        words = [w for _, w in _word_entries(toks)]
        if 1 <= len(words) <= 10:
            counts["simple_sentences"] += 1
        if _has_clause_coordination(toks, stags):
            counts["compound_sentences"] += 1
        counts["basic_punctuation"] += sum(
            1 for t in toks if not t.is_word and t.surface in _BASIC_MARKS
        )
        if any(not t.is_word and t.surface in _QUOTE_MARKS for t in toks):
            counts["dialogue"] += 1
        counts["narrative_indicators"] += _phrase_occurrences(
            words, lexicon.narrative_indicators
        )
    return counts


def _simile_count(toks: Sequence[Token], tags: Sequence[str]) -> int:
    """"as <modifier> as" frames plus "like" governed by a verb."""
    entries = _word_entries(toks)
    count = 0
    for j, (ti, w) in enumerate(entries):
        if (
            w == "as"
            and j + 2 < len(entries)
            and entries[j + 2][1] == "as"
            and entries[j + 1][1] not in FUNCTION_WORDS
            and not entries[j + 1][1].isdigit()
        ):
            count += 1
        elif w == "like" and j > 0 and tags[entries[j - 1][0]].startswith("VB"):
            count += 1
    return count


def _alliteration_runs(content_words: Sequence[str]) -> int:
    """Maximal runs of >=3 content words sharing an initial letter; function
    words are transparent (already filtered out)."""
    runs = 0
    run_len = 1
    for prev, cur in zip(content_words, content_words[1:]):
        if cur[0] == prev[0]:
            run_len += 1
        else:
            if run_len >= 3:
                runs += 1
            run_len = 1
    if run_len >= 3 and content_words:
        runs += 1
    return runs


def detect_ks3(
    seg: SegmentedText, tags: Sequence[str], lexicon: CurriculumLexicon
) -> dict[str, int]:
    """Complex sentences, advanced punctuation, summary/inference keywords,
    similes, and alliteration."""
    counts = dict.fromkeys(KS3_FEATURES, 0)
    for toks, stags in _sentences(seg, tags):
        words = [w for _, w in _word_entries(toks)]
        if any(w in lexicon.subordinating_conjunctions for w in words):
            counts["complex_sentences"] += 1
        counts["advanced_punctuation"] += sum(
            1 for t in toks if not t.is_word and t.surface in _ADVANCED_MARKS
        )
        counts["summarizing_indicators"] += _phrase_occurrences(
            words, lexicon.summarizing_indicators
        )
        counts["implied_meaning"] += _phrase_occurrences(words, lexicon.implied_meaning)
        counts["similes"] += _simile_count(toks, stags)
        content = [w for w in words if w not in FUNCTION_WORDS]
        counts["alliteration"] += _alliteration_runs(content)
    return counts


def _mark_runs(toks: Sequence[Token], mark: str, min_len: int) -> int:
    """Count runs of >= min_len adjacent identical marks (no gap between)."""
    runs = 0
    run_len = 0
    prev_end = None
    for t in toks:
        if not t.is_word and t.surface == mark and (run_len == 0 or t.start == prev_end):
            run_len += 1
        else:
            if run_len >= min_len:
                runs += 1
            run_len = 1 if (not t.is_word and t.surface == mark) else 0
        prev_end = t.end
    if run_len >= min_len:
        runs += 1
    return runs


def _sophisticated_punctuation(toks: Sequence[Token]) -> int:
    """Long dashes and ellipses: em/en dashes and "…" count singly; runs of
    three or more periods and of two or more hyphens count once per run."""
    count = sum(
        1 for t in toks if not t.is_word and (t.surface in _LONG_DASHES or t.surface == "…")
    )
    count += _mark_runs(toks, ".", 3)
    count += _mark_runs(toks, "-", 2)
    return count


def _personification(
    toks: Sequence[Token],
    tags: Sequence[str],
    lexicon: CurriculumLexicon,
    person_names: frozenset[str],
) -> int:
    """Person-like word (capitalized off sentence start, or a known name)
    followed within two words by a human-action verb."""
    entries = _word_entries(toks)
    count = 0
    for j, (ti, w) in enumerate(entries):
        person_like = w in person_names or (j > 0 and toks[ti].surface[:1].isupper())
        if not person_like:
            continue
        window = entries[j + 1 : j + 3]
        if any(nw in lexicon.human_action_verbs for _, nw in window):
            count += 1
    return count


def detect_ks4(
    seg: SegmentedText,
    tags: Sequence[str],
    lexicon: CurriculumLexicon,
    gazetteers: Gazetteers | None = None,
) -> dict[str, int]:
    """Compound-complex sentences, long dashes/ellipses, evaluative keywords,
    in-sentence repetition, personification, and tone shifts."""
    person_names: frozenset[str] = frozenset()
    if gazetteers is not None:
        person_names = frozenset(
            entry[0] for entry in gazetteers.entries.get("PERSON", frozenset())
            if len(entry) == 1
        )
    counts = dict.fromkeys(KS4_FEATURES, 0)
    for toks, stags in _sentences(seg, tags):
        entries = _word_entries(toks)
        words = [w for _, w in entries]
        if _has_clause_coordination(toks, stags) and any(
            w in lexicon.subordinating_conjunctions for w in words
        ):
            counts["compound_complex_sentences"] += 1
        counts["sophisticated_punctuation"] += _sophisticated_punctuation(toks)
        counts["evaluative_language"] += _phrase_occurrences(
            words, lexicon.evaluative_language
        )
        content = Counter(w for w in words if w not in FUNCTION_WORDS)
        counts["repetition"] += sum(1 for c in content.values() if c >= 3)
        counts["personification"] += _personification(toks, stags, lexicon, person_names)
        for j, (ti, w) in enumerate(entries):
            if w not in lexicon.tone_shifts:
                continue
            clause_start = j == 0 or (
                ti > 0
                and not toks[ti - 1].is_word
                and toks[ti - 1].surface in _CLAUSE_MARKS
            )
            if clause_start:
                counts["tone_shifts"] += 1
    return counts


def _rhetorical_pattern(words: Sequence[str]) -> int:
    """Count "not only ... but also" frames left to right."""
    count = 0
    i = 0
    stage = 0
    while i + 1 < len(words):
        pair = (words[i], words[i + 1])
        if stage == 0 and pair == ("not", "only"):
            stage = 1
            i += 2
        elif stage == 1 and pair == ("but", "also"):
            count += 1
            stage = 0
            i += 2
        else:
            i += 1
    return count


def detect_ks5(
    seg: SegmentedText, tags: Sequence[str], lexicon: CurriculumLexicon
) -> dict[str, int]:
    """Logical markers, critical-evaluation keywords, contrastive co-occurrence
    (the irony heuristic), and "not only ... but also" frames.

    A sentence scores for irony when at least two distinct contrastive terms
    co-occur in it; this is a stated approximation, not real irony detection.
    """
    counts = dict.fromkeys(KS5_FEATURES, 0)
    for toks, stags in _sentences(seg, tags):
        words = [w for _, w in _word_entries(toks)]
        counts["advanced_inference"] += _phrase_occurrences(
            words, lexicon.advanced_inference
        )
        counts["critical_analysis"] += _phrase_occurrences(
            words, lexicon.critical_analysis
        )
        contrastive = {w for w in words if w in lexicon.contrastive_terms}
        if len(contrastive) >= 2:
            counts["irony"] += 1
        counts["rhetorical_devices"] += _rhetorical_pattern(words)
    return counts


def count_curriculum_features(
    seg: SegmentedText,
    tags: Sequence[str],
    lexicon: CurriculumLexicon,
    gazetteers: Gazetteers | None = None,
) -> CurriculumFeatureCounts:
    """All four stages' counts; empty text yields all zeros with full keys."""
    return CurriculumFeatureCounts(
        ks2=detect_ks2(seg, tags, lexicon),
        ks3=detect_ks3(seg, tags, lexicon),
        ks4=detect_ks4(seg, tags, lexicon, gazetteers),
        ks5=detect_ks5(seg, tags, lexicon),
    )
