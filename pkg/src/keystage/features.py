"""Fixed-length linguistic feature vector: ten categories, eighty features.

Categories (schema v1, in order): basic text metrics, detailed sentence
information, lexical diversity, readability scores, sentence structure,
word usage, punctuation and style, sentiment, emotion, named entities.

Definitions shared across categories:
    words            word tokens; identity is the case-folded surface
    long word        more than 6 alphanumeric characters
    complex word     3 or more syllables
    difficult word   not on the easy-word list, nor a regular inflection
                     (plural, past, -ing, -ly, possessive) of a listed word;
                     all-digit words count as easy
    sentence TTR     distinct words / words within one sentence

Every function is pure and total for non-degenerate input: any text with at
least one word token yields a finite value for all eighty features. The
documented guard values (zeros) replace undefined ratios. This module emits
raw values; standardization happens inside the classifier pipeline.

Note: paragraphs-per-sentence is a deliberately odd ratio kept for schema
fidelity; it is the paragraph count divided by the sentence count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateInputError, ValidationError
from .lexicons import (
    ARTICLES,
    EMOTIONS,
    FUNCTION_WORDS,
    NER_LABELS,
    SUBORDINATORS,
    AffectLexicon,
    Resources,
    WordList,
    ner_counts,
    tag_pos,
)
from .textseg import SegmentedText

FEATURE_SCHEMA_VERSION = "1"

_BASIC = (
    "basic.word_count",
    "basic.sentence_count",
    "basic.unique_word_count",
    "basic.mean_sentence_length_words",
    "basic.mean_word_length_chars",
)
_SENTENCE_INFO = (
    "sentence_info.mean_chars_per_word",
    "sentence_info.mean_syllables_per_word",
    "sentence_info.mean_chars_per_sentence",
    "sentence_info.mean_syllables_per_sentence",
    "sentence_info.mean_words_per_sentence",
    "sentence_info.mean_unique_words_per_sentence",
    "sentence_info.paragraphs_per_sentence",
    "sentence_info.mean_long_words_per_sentence",
    "sentence_info.mean_complex_words_per_sentence",
    "sentence_info.mean_difficult_words_per_sentence",
)
_DIVERSITY = (
    "diversity.ttr",
    "diversity.yule_k",
    "diversity.simpson_d",
    "diversity.herdan_c",
    "diversity.brunet_w",
    "diversity.honore_r",
)
_READABILITY = (
    "readability.kincaid",
    "readability.ari",
    "readability.coleman_liau",
    "readability.flesch",
    "readability.gunning_fog",
    "readability.lix",
    "readability.smog",
    "readability.rix",
    "readability.dale_chall",
)
_STRUCTURE = (
    "sentence_structure.vbn_count",
    "sentence_structure.vbz_count",
    "sentence_structure.vbd_count",
    "sentence_structure.base_verb_count",
    "sentence_structure.nn_count",
    "sentence_structure.vbg_count",
    "sentence_structure.mean_sentence_ttr",
    "sentence_structure.mean_words_per_sentence",
    "sentence_structure.mean_words_per_paragraph",
)
_WORD_USAGE = (
    "word_usage.pronoun_count",
    "word_usage.function_word_count",
    "word_usage.conjunction_count",
    "word_usage.preposition_count",
)
_PUNCTUATION = (
    "punctuation_style.period_count",
    "punctuation_style.comma_count",
    "punctuation_style.exclamation_count",
    "punctuation_style.question_count",
    "punctuation_style.colon_count",
    "punctuation_style.semicolon_count",
    "punctuation_style.quote_count",
    "punctuation_style.parenthesis_count",
    "punctuation_style.dash_count",
    "punctuation_style.other_punct_count",
    "punctuation_style.pronoun_initial_sentences",
    "punctuation_style.interrogative_initial_sentences",
    "punctuation_style.article_initial_sentences",
    "punctuation_style.subordination_initial_sentences",
    "punctuation_style.conjunction_initial_sentences",
    "punctuation_style.preposition_initial_sentences",
)
_SENTIMENT = (
    "sentiment.polarity",
    "sentiment.subjectivity",
)
_EMOTION = tuple(f"emotion.{name}" for name in EMOTIONS)
_NER = tuple(f"ner.{label.lower()}" for label in NER_LABELS)

FEATURE_NAMES: tuple[str, ...] = (
    _BASIC + _SENTENCE_INFO + _DIVERSITY + _READABILITY + _STRUCTURE
    + _WORD_USAGE + _PUNCTUATION + _SENTIMENT + _EMOTION + _NER
)

FEATURE_COUNT = len(FEATURE_NAMES)

_QUOTE_MARKS = frozenset({'"', "'", "‘", "’", "“", "”", "«", "»"})
_PAREN_MARKS = frozenset({"(", ")", "[", "]", "{", "}"})
_DASH_MARKS = frozenset({"-", "–", "—", "‒", "―"})


@dataclass(frozen=True)
class FeatureVector:
    """Ordered feature values under one schema version."""

    values: tuple[float, ...]
    schema: tuple[str, ...] = FEATURE_NAMES
    schema_version: str = FEATURE_SCHEMA_VERSION

    def __post_init__(self):
        if len(self.values) != len(self.schema):
            raise ValidationError(
                f"feature vector has {len(self.values)} values for {len(self.schema)} names"
            )

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.schema, self.values))

    def __getitem__(self, name: str) -> float:
        return self.values[self.schema.index(name)]


@dataclass(frozen=True)
class DiversityMetrics:
    ttr: float
    yule_k: float
    simpson_d: float
    herdan_c: float
    brunet_w: float
    honore_r: float


@dataclass(frozen=True)
class ReadabilityScores:
    kincaid: float
    ari: float
    coleman_liau: float
    flesch: float
    gunning_fog: float
    lix: float
    smog: float
    rix: float
    dale_chall: float


def _require_words(seg: SegmentedText) -> tuple:
    words = seg.word_tokens()
    if not words:
        raise DegenerateInputError("text contains no word tokens")
    return words


def basic_metrics(seg: SegmentedText) -> dict[str, float]:
    """Word, sentence, and unique-word counts plus the two mean lengths."""
    words = _require_words(seg)
    n_words = len(words)
    n_sents = seg.sentence_count
    unique = len({w.surface.casefold() for w in words})
    total_chars = sum(w.char_count for w in words)
    return {
        "word_count": float(n_words),
        "sentence_count": float(n_sents),
        "unique_word_count": float(unique),
        "mean_sentence_length_words": n_words / n_sents,
        "mean_word_length_chars": total_chars / n_words,
    }


def _is_difficult(word: str, easy_words: WordList) -> bool:
    w = word.casefold()
    if w.replace(",", "").isdigit():
        return False
    for base in _inflection_candidates(w):
        if base in easy_words:
            return False
    return True


def _inflection_candidates(word: str) -> list[str]:
    """The word itself plus regular de-inflections worth checking."""
    cands = [word]
    for suffix in ("'s", "’s"):
        if word.endswith(suffix):
            cands.append(word[: -len(suffix)])
    extra: list[str] = []
    for base in list(cands):
        if base.endswith("ies") and len(base) > 4:
            extra.append(base[:-3] + "y")
        if base.endswith("es") and len(base) > 3:
            extra.append(base[:-2])
        if base.endswith("s") and len(base) > 3 and not base.endswith("ss"):
            extra.append(base[:-1])
        if base.endswith("ed") and len(base) > 3:
            stem = base[:-2]
            extra.append(stem)
            extra.append(base[:-1])  # hoped -> hope
            if len(stem) > 2 and stem[-1] == stem[-2]:
                extra.append(stem[:-1])  # stopped -> stop
        if base.endswith("ing") and len(base) > 4:
            stem = base[:-3]
            extra.append(stem)
            extra.append(stem + "e")  # making -> make
            if len(stem) > 2 and stem[-1] == stem[-2]:
                extra.append(stem[:-1])  # running -> run
        if base.endswith("ily") and len(base) > 4:
            extra.append(base[:-3] + "y")  # happily -> happy
        if base.endswith("ly") and len(base) > 3:
            extra.append(base[:-2])
    cands.extend(extra)
    return cands


def sentence_info(seg: SegmentedText, easy_words: WordList) -> dict[str, float]:
    """Per-word and per-sentence averages of lengths and word-class counts."""
    words = _require_words(seg)
    n_words = len(words)
    n_sents = seg.sentence_count
    total_chars = sum(w.char_count for w in words)
    total_sylls = sum(w.syllables for w in words)
    long_words = sum(1 for w in words if w.char_count > 6)
    complex_words = sum(1 for w in words if w.syllables >= 3)
    difficult = sum(1 for w in words if _is_difficult(w.surface, easy_words))
    unique_per_sentence = []
    for si in range(n_sents):
        sw = [t for t in seg.sentence_tokens(si) if t.is_word]
        unique_per_sentence.append(len({t.surface.casefold() for t in sw}))
    return {
        "mean_chars_per_word": total_chars / n_words,
        "mean_syllables_per_word": total_sylls / n_words,
        "mean_chars_per_sentence": total_chars / n_sents,
        "mean_syllables_per_sentence": total_sylls / n_sents,
        "mean_words_per_sentence": n_words / n_sents,
        "mean_unique_words_per_sentence": sum(unique_per_sentence) / n_sents,
        "paragraphs_per_sentence": seg.paragraph_count / n_sents,
        "mean_long_words_per_sentence": long_words / n_sents,
        "mean_complex_words_per_sentence": complex_words / n_sents,
        "mean_difficult_words_per_sentence": difficult / n_sents,
    }


def diversity(seg: SegmentedText) -> DiversityMetrics:
    """Type-token diversity metrics with total guard values.

    ttr = V/N. Yule's K uses the frequency-spectrum form
    K = 10^4 * (sum_m m^2 * V_m - N) / N^2 where V_m is the number of types
    occurring exactly m times (ordering-free identity of the i^2 f_i sum).
    Simpson's D = sum_i f_i (f_i - 1) / (N (N - 1)). Herdan's C = ln N / ln V.
    Brunet's W = N^(V^-0.165). Honore's R = 100 ln N / (1 - V1/V) with V1 the
    hapax count. Guards: simpson_d = 0 when N < 2; herdan_c = 0 when V <= 1;
    honore_r = 0 when V1 = V.
    """
    words = _require_words(seg)
    freq: dict[str, int] = {}
    for w in words:
        key = w.surface.casefold()
        freq[key] = freq.get(key, 0) + 1
    n = len(words)
    v = len(freq)
    spectrum: dict[int, int] = {}
    for count in freq.values():
        spectrum[count] = spectrum.get(count, 0) + 1
    v1 = spectrum.get(1, 0)

    ttr = v / n
    yule_k = 1e4 * (sum(m * m * vm for m, vm in spectrum.items()) - n) / (n * n)
    simpson_d = (
        sum(f * (f - 1) for f in freq.values()) / (n * (n - 1)) if n >= 2 else 0.0
    )
    herdan_c = math.log(n) / math.log(v) if v > 1 else 0.0
    brunet_w = n ** (v ** -0.165)
    honore_r = 100.0 * math.log(n) / (1.0 - v1 / v) if v1 != v else 0.0
    return DiversityMetrics(
        ttr=ttr,
        yule_k=yule_k,
        simpson_d=simpson_d,
        herdan_c=herdan_c,
        brunet_w=brunet_w,
        honore_r=honore_r,
    )


def readability(seg: SegmentedText, easy_words: WordList) -> ReadabilityScores:
    """The nine classical readability formulas.

    Operands: W words, S sentences, Syll syllables, C alphanumeric chars,
    Long words > 6 chars, Complex/Poly words >= 3 syllables, Difficult words
    off the easy list. L and S100 are chars and sentences per 100 words.
    The Dale-Chall score is the raw two-term form without the constant
    adjustment for high difficult-word share.
    """
    words = _require_words(seg)
    w = len(words)
    s = seg.sentence_count
    syll = sum(t.syllables for t in words)
    chars = sum(t.char_count for t in words)
    long_w = sum(1 for t in words if t.char_count > 6)
    complex_w = sum(1 for t in words if t.syllables >= 3)
    difficult = sum(1 for t in words if _is_difficult(t.surface, easy_words))

    wl = syll / w  # mean syllables per word
    sl = w / s  # mean words per sentence
    big_l = 100.0 * chars / w
    s100 = 100.0 * s / w

    return ReadabilityScores(
        kincaid=0.39 * sl + 11.8 * wl - 15.59,
        ari=4.71 * (chars / w) + 0.5 * sl - 21.43,
        coleman_liau=0.0588 * big_l - 0.296 * s100 - 15.8,
        flesch=206.835 - 1.015 * sl - 84.6 * wl,
        gunning_fog=0.4 * (sl + 100.0 * complex_w / w),
        lix=sl + 100.0 * long_w / w,
        smog=1.0430 * math.sqrt(complex_w * 30.0 / s) + 3.1291,
        rix=long_w / s,
        dale_chall=0.1579 * (100.0 * difficult / w) + 0.0496 * sl,
    )


def sentence_structure(seg: SegmentedText, tags: list[str]) -> dict[str, float]:
    """Verb/noun tag counts and per-sentence/paragraph averages."""
    _require_words(seg)
    if len(tags) != len(seg.tokens):
        raise ValidationError("tags are not aligned with tokens")
    counts = {"VBN": 0, "VBZ": 0, "VBD": 0, "NN": 0, "VBG": 0}
    base_verbs = 0
    for tag in tags:
        if tag in counts:
            counts[tag] += 1
        elif tag in ("VB", "VBP"):
            base_verbs += 1
    n_words = len(seg.word_tokens())
    n_sents = seg.sentence_count
    n_paras = seg.paragraph_count
    sentence_ttrs = []
    for si in range(n_sents):
        sw = [t.surface.casefold() for t in seg.sentence_tokens(si) if t.is_word]
        if sw:
            sentence_ttrs.append(len(set(sw)) / len(sw))
    mean_ttr = sum(sentence_ttrs) / len(sentence_ttrs) if sentence_ttrs else 0.0
    return {
        "vbn_count": float(counts["VBN"]),
        "vbz_count": float(counts["VBZ"]),
        "vbd_count": float(counts["VBD"]),
        "base_verb_count": float(base_verbs),
        "nn_count": float(counts["NN"]),
        "vbg_count": float(counts["VBG"]),
        "mean_sentence_ttr": mean_ttr,
        "mean_words_per_sentence": n_words / n_sents,
        "mean_words_per_paragraph": n_words / n_paras if n_paras else 0.0,
    }


def word_usage(seg: SegmentedText, tags: list[str]) -> dict[str, float]:
    """Closed-class usage counts."""
    _require_words(seg)
    if len(tags) != len(seg.tokens):
        raise ValidationError("tags are not aligned with tokens")
    pronouns = sum(1 for t in tags if t == "PRP")
    conjunctions = sum(1 for t in tags if t == "CC")
    prepositions = sum(1 for t in tags if t == "IN")
    function_words = sum(
        1 for tok in seg.tokens if tok.is_word and tok.surface.casefold() in FUNCTION_WORDS
    )
    return {
        "pronoun_count": float(pronouns),
        "function_word_count": float(function_words),
        "conjunction_count": float(conjunctions),
        "preposition_count": float(prepositions),
    }


def _first_word_of_sentence(seg: SegmentedText, tags: list[str], si: int):
    lo, hi = seg.sentence_bounds[si]
    for i in range(lo, hi):
        if seg.tokens[i].is_word:
            return seg.tokens[i], tags[i]
    return None, None


def punctuation_style(seg: SegmentedText, tags: list[str]) -> dict[str, float]:
    """Counts per punctuation-mark class and sentence-opening word classes.

    A sentence is classified by its first word token into exactly one
    opening class, checked in this order: pronoun, interrogative, article,
    subordinating word, conjunction, preposition.
    """
    _require_words(seg)
    if len(tags) != len(seg.tokens):
        raise ValidationError("tags are not aligned with tokens")
    marks = {
        "period_count": 0, "comma_count": 0, "exclamation_count": 0,
        "question_count": 0, "colon_count": 0, "semicolon_count": 0,
        "quote_count": 0, "parenthesis_count": 0, "dash_count": 0,
        "other_punct_count": 0,
    }
    for tok in seg.tokens:
        if tok.kind != "punctuation":
            continue
        ch = tok.surface
        if ch == ".":
            marks["period_count"] += 1
        elif ch == ",":
            marks["comma_count"] += 1
        elif ch == "!":
            marks["exclamation_count"] += 1
        elif ch == "?":
            marks["question_count"] += 1
        elif ch == ":":
            marks["colon_count"] += 1
        elif ch == ";":
            marks["semicolon_count"] += 1
        elif ch in _QUOTE_MARKS:
            marks["quote_count"] += 1
        elif ch in _PAREN_MARKS:
            marks["parenthesis_count"] += 1
        elif ch in _DASH_MARKS:
            marks["dash_count"] += 1
        else:
            marks["other_punct_count"] += 1

    openings = {
        "pronoun_initial_sentences": 0,
        "interrogative_initial_sentences": 0,
        "article_initial_sentences": 0,
        "subordination_initial_sentences": 0,
        "conjunction_initial_sentences": 0,
        "preposition_initial_sentences": 0,
    }
    for si in range(seg.sentence_count):
        tok, tag = _first_word_of_sentence(seg, tags, si)
        if tok is None:
            continue
        w = tok.surface.casefold()
        if tag == "PRP":
            openings["pronoun_initial_sentences"] += 1
        elif tag == "WDT":
            openings["interrogative_initial_sentences"] += 1
        elif w in ARTICLES:
            openings["article_initial_sentences"] += 1
        elif w in SUBORDINATORS:
            openings["subordination_initial_sentences"] += 1
        elif tag == "CC":
            openings["conjunction_initial_sentences"] += 1
        elif tag == "IN":
            openings["preposition_initial_sentences"] += 1
    return {k: float(v) for k, v in {**marks, **openings}.items()}


def sentiment_emotion(seg: SegmentedText, lex: AffectLexicon) -> dict[str, float]:
    """Lexicon-matched polarity/subjectivity means and emotion densities.

    Polarity and subjectivity are means over matched word occurrences,
    0 when nothing matches. Each emotion score is the count of word
    occurrences carrying that emotion divided by the word count.
    """
    words = _require_words(seg)
    pol_values = []
    subj_values = []
    emotion_counts = {e: 0 for e in EMOTIONS}
    for w in words:
        key = w.surface.casefold()
        if key in lex.polarity:
            pol_values.append(lex.polarity[key])
        if key in lex.subjectivity:
            subj_values.append(lex.subjectivity[key])
        for e in lex.emotions.get(key, ()):
            emotion_counts[e] += 1
    n_words = len(words)
    out = {
        "polarity": sum(pol_values) / len(pol_values) if pol_values else 0.0,
        "subjectivity": sum(subj_values) / len(subj_values) if subj_values else 0.0,
    }
    for e in EMOTIONS:
        out[e] = emotion_counts[e] / n_words
    return out


def extract_features(seg: SegmentedText, resources: Resources) -> FeatureVector:
    """Concatenate all ten categories in schema order."""
    _require_words(seg)
    tags = tag_pos(seg)
    basic = basic_metrics(seg)
    info = sentence_info(seg, resources.easy_words)
    div = diversity(seg)
    read = readability(seg, resources.easy_words)
    struct = sentence_structure(seg, tags)
    usage = word_usage(seg, tags)
    punct = punctuation_style(seg, tags)
    senti = sentiment_emotion(seg, resources.affect)
    ner = ner_counts(seg, resources.gazetteers)

    values: list[float] = []
    values.extend(basic[name.split(".", 1)[1]] for name in _BASIC)
    values.extend(info[name.split(".", 1)[1]] for name in _SENTENCE_INFO)
    values.extend(getattr(div, name.split(".", 1)[1]) for name in _DIVERSITY)
    values.extend(getattr(read, name.split(".", 1)[1]) for name in _READABILITY)
    values.extend(struct[name.split(".", 1)[1]] for name in _STRUCTURE)
    values.extend(usage[name.split(".", 1)[1]] for name in _WORD_USAGE)
    values.extend(punct[name.split(".", 1)[1]] for name in _PUNCTUATION)
    values.extend(senti[name.split(".", 1)[1]] for name in _SENTIMENT)
    values.extend(senti[name.split(".", 1)[1]] for name in _EMOTION)
    values.extend(float(ner[name.split(".", 1)[1].upper()]) for name in _NER)
    vec = FeatureVector(values=tuple(values))
    for name, value in zip(vec.schema, vec.values):
        if not math.isfinite(value):
            raise ValidationError(f"non-finite feature {name}: {value}")
    return vec


_CATEGORY_DEFINITIONS = {
    "basic": "document-level counts and mean lengths",
    "sentence_info": "per-word and per-sentence averages",
    "diversity": "type-token diversity metrics",
    "readability": "classical readability formulas",
    "sentence_structure": "POS tag counts and structural means",
    "word_usage": "closed-class word usage counts",
    "punctuation_style": "punctuation mark classes and sentence openings",
    "sentiment": "lexicon polarity and subjectivity means",
    "emotion": "emotion-marked word densities",
    "ner": "named-entity mention counts per label",
}

_FORMULAS = {
    "diversity.ttr": "V / N",
    "diversity.yule_k": "10^4 * (sum_m m^2*V_m - N) / N^2",
    "diversity.simpson_d": "sum_i f_i*(f_i - 1) / (N*(N - 1))",
    "diversity.herdan_c": "ln N / ln V",
    "diversity.brunet_w": "N^(V^-0.165)",
    "diversity.honore_r": "100 * ln N / (1 - V1/V)",
    "readability.kincaid": "0.39*(W/S) + 11.8*(Syll/W) - 15.59",
    "readability.ari": "4.71*(C/W) + 0.5*(W/S) - 21.43",
    "readability.coleman_liau": "0.0588*L - 0.296*S100 - 15.8",
    "readability.flesch": "206.835 - 1.015*(W/S) - 84.6*(Syll/W)",
    "readability.gunning_fog": "0.4*((W/S) + 100*Complex/W)",
    "readability.lix": "W/S + 100*Long/W",
    "readability.smog": "1.0430*sqrt(Poly*30/S) + 3.1291",
    "readability.rix": "Long/S",
    "readability.dale_chall": "0.1579*(100*Difficult/W) + 0.0496*(W/S)",
}


def feature_schema_document() -> dict:
    """JSON-able schema description for external vector consumers."""
    entries = []
    for name in FEATURE_NAMES:
        category = name.split(".", 1)[0]
        entry = {
            "name": name,
            "category": category,
            "category_description": _CATEGORY_DEFINITIONS[category],
        }
        if name in _FORMULAS:
            entry["formula"] = _FORMULAS[name]
        entries.append(entry)
    return {
        "schema_version": FEATURE_SCHEMA_VERSION,
        "feature_count": FEATURE_COUNT,
        "features": entries,
    }
