"""Word lists, affect lexicon, rule-based POS tagging, gazetteer NER.

The engine never depends on statistical taggers: part-of-speech tags come
from a fixed cascade (closed-class lookup, then suffix rules, then a noun
default) and named entities come from editable gazetteer files plus one
capitalisation heuristic for persons. Both are deterministic by design.

Resource files are plain UTF-8 text, one entry per line, so every list can
be replaced or extended without touching code. Bundled defaults live under
``keystage/resources`` and are approximations suitable for development;
licensed originals can be swapped in via the ``resources.*`` config keys.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

from .errors import ResourceError, ValidationError
from .textseg import SegmentedText, Token

POS_TAGS: tuple[str, ...] = (
    "VB", "VBP", "VBZ", "VBD", "VBN", "VBG",
    "NN", "PRP", "IN", "CC", "DT", "WDT", "OTHER",
)

NER_LABELS: tuple[str, ...] = (
    "PERSON", "NORP", "FAC", "ORG", "GPE", "LOC",
    "PRODUCT", "EVENT", "WORK_OF_ART", "LAW", "LANGUAGE",
)

EMOTIONS: tuple[str, ...] = (
    "fear", "anger", "anticipation", "trust",
    "surprise", "sadness", "disgust", "joy",
)

DETERMINERS = frozenset({
    "the", "a", "an", "this", "that", "these", "those", "each", "every",
    "either", "neither", "some", "any", "no", "all", "both", "another",
    "such", "many", "much", "few", "several", "most", "half", "enough",
})

ARTICLES = frozenset({"a", "an", "the"})

PRONOUNS = frozenset({
    "i", "you", "he", "she", "it", "we", "they",
    "me", "him", "her", "us", "them",
    "my", "your", "his", "its", "our", "their",
    "mine", "yours", "hers", "ours", "theirs",
    "myself", "yourself", "himself", "herself", "itself",
    "ourselves", "yourselves", "themselves",
    "somebody", "someone", "something", "anybody", "anyone", "anything",
    "everybody", "everyone", "everything", "nobody", "nothing", "one",
})

INTERROGATIVES = frozenset({
    "who", "whom", "whose", "which", "what", "when", "where", "why", "how",
})

# Words that open a dependent clause. A subset also lives in PREPOSITIONS;
# the tagger maps all of them to IN, mirroring treebank practice.
SUBORDINATORS = frozenset({
    "because", "although", "though", "while", "if", "unless", "since",
    "whereas", "until", "whether", "after", "before", "once", "whenever",
    "wherever", "as",
})

PREPOSITIONS = frozenset({
    "in", "on", "at", "by", "for", "with", "about", "against", "between",
    "among", "into", "through", "during", "above", "below", "to", "from",
    "up", "down", "of", "off", "over", "under", "again", "further", "near",
    "upon", "within", "without", "toward", "towards", "across", "behind",
    "beyond", "beneath", "beside", "besides", "along", "around", "amid",
    "despite", "except", "per", "than", "like",
}) | SUBORDINATORS

CONJUNCTIONS = frozenset({"and", "but", "or", "nor", "so", "yet", "plus"})

# Auxiliary and modal forms with their fixed tags.
AUXILIARY_TAGS: dict[str, str] = {
    "be": "VB", "am": "VBP", "is": "VBZ", "are": "VBP", "was": "VBD",
    "were": "VBD", "been": "VBN", "being": "VBG",
    "do": "VBP", "does": "VBZ", "did": "VBD", "done": "VBN",
    "have": "VBP", "has": "VBZ", "had": "VBD", "having": "VBG",
    "will": "VB", "would": "VB", "shall": "VB", "should": "VB",
    "can": "VB", "could": "VB", "may": "VB", "might": "VB", "must": "VB",
}

# Auxiliary forms of have/be: a following -ed word is a participle (VBN).
_PERFECT_AUX = frozenset({
    "have", "has", "had", "having",
    "be", "am", "is", "are", "was", "were", "been", "being",
})

# Common irregular past forms the suffix rules cannot reach.
IRREGULAR_PAST = frozenset({
    "ate", "became", "began", "bent", "bit", "blew", "bought", "broke",
    "brought", "built", "came", "caught", "chose", "crept", "cut", "drank",
    "drew", "drove", "fell", "felt", "flew", "forgot", "fought", "found",
    "froze", "gave", "got", "grew", "heard", "held", "hid", "hit", "hung",
    "hurt", "kept", "knew", "laid", "lay", "leapt", "led", "left", "lent",
    "let", "lost", "made", "meant", "met", "paid", "put", "ran", "rang",
    "rode", "rose", "said", "sang", "sank", "sat", "saw", "sent", "set",
    "shook", "shone", "shot", "showed", "shut", "slept", "sold", "sought",
    "spent", "spoke", "sprang", "stole", "stood", "struck", "swam", "swept",
    "swore", "swung", "taught", "thought", "threw", "told", "took", "tore",
    "went", "wept", "woke", "won", "wore", "wrote",
})

FUNCTION_WORDS = (
    DETERMINERS | PRONOUNS | INTERROGATIVES | PREPOSITIONS | CONJUNCTIONS
    | frozenset(AUXILIARY_TAGS) | frozenset({"not", "there", "then", "too", "very"})
)

# Frequent verb stems backing the -s/-es third-person suffix rule.
COMMON_VERB_STEMS = frozenset({
    "run", "walk", "talk", "say", "make", "go", "take", "see", "come",
    "want", "look", "use", "find", "give", "tell", "work", "call", "try",
    "ask", "need", "feel", "seem", "leave", "get", "keep", "let", "begin",
    "help", "show", "hear", "play", "move", "live", "believe", "hold",
    "bring", "happen", "write", "sit", "stand", "lose", "pay", "meet",
    "include", "continue", "set", "learn", "change", "lead", "understand",
    "watch", "follow", "stop", "create", "speak", "read", "allow", "add",
    "spend", "grow", "open", "win", "offer", "remember", "love", "consider",
    "appear", "buy", "wait", "serve", "die", "send", "expect", "build",
    "stay", "fall", "cut", "reach", "kill", "remain", "suggest", "raise",
    "pass", "sell", "require", "report", "decide", "pull", "return",
    "explain", "hope", "develop", "carry", "break", "receive", "agree",
    "support", "hit", "produce", "eat", "cover", "catch", "draw", "choose",
    "wish", "drop", "seek", "deal", "jump", "climb", "shout", "whisper",
    "laugh", "cry", "smile", "dance", "sing", "know", "think", "mean",
    "become", "turn", "start", "end", "fly", "swim", "drink", "sleep",
    "wake", "throw", "push", "wear", "ride", "drive", "teach", "fight",
    "point", "answer", "arrive", "wonder", "notice", "reply", "nod",
})


@dataclass(frozen=True)
class WordList:
    """Named, case-folded membership list."""

    name: str
    entries: frozenset[str]

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class AffectLexicon:
    """Word-level polarity, subjectivity, and emotion associations."""

    polarity: dict[str, float]
    subjectivity: dict[str, float]
    emotions: dict[str, frozenset[str]]


@dataclass(frozen=True)
class Gazetteers:
    """Entity entries per NER label; multiword entries are token tuples."""

    entries: dict[str, frozenset[tuple[str, ...]]]

    def max_entry_length(self) -> int:
        longest = 1
        for label_entries in self.entries.values():
            for entry in label_entries:
                longest = max(longest, len(entry))
        return longest


def default_resource_dir() -> Path:
    """Directory of the word-list and lexicon defaults bundled in the package."""
    return Path(str(importlib_resources.files("keystage") / "resources"))


def load_word_list(path: str | Path, name: str) -> WordList:
    """Read one entry per line; blank lines and ``#`` comments are skipped."""
    path = Path(path)
    if not path.is_file():
        raise ResourceError(f"word list {name!r} not found at {path}")
    entries: set[str] = set()
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        entries.add(line.casefold())
    if not entries:
        raise ValidationError(f"word list {name!r} at {path} has no entries")
    return WordList(name=name, entries=frozenset(entries))


def expand_word_families(base: WordList, families_path: str | Path) -> WordList:
    """Extend a head-word list with derived forms from a family file.

    Each line is a head word followed by whitespace-separated family members:
    ``analyse analyses analysed analysing analysis analyst``.
    """
    path = Path(families_path)
    if not path.is_file():
        raise ResourceError(f"word family file not found at {path}")
    entries = set(base.entries)
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        entries.update(w.casefold() for w in line.split())
    return WordList(name=base.name, entries=frozenset(entries))


def load_affect_lexicon(path: str | Path) -> AffectLexicon:
    """Parse the tab-separated affect table.

    Columns: word, polarity in [-1, 1], subjectivity in [0, 1], and a
    comma-separated (possibly empty) emotion list drawn from EMOTIONS.
    """
    path = Path(path)
    if not path.is_file():
        raise ResourceError(f"affect lexicon not found at {path}")
    polarity: dict[str, float] = {}
    subjectivity: dict[str, float] = {}
    emotions: dict[str, frozenset[str]] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValidationError(f"{path}:{lineno}: expected 4 tab-separated fields")
        word, pol_s, subj_s, emo_s = parts
        word = word.strip().casefold()
        try:
            pol = float(pol_s)
            subj = float(subj_s)
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: non-numeric score") from exc
        if not -1.0 <= pol <= 1.0:
            raise ValidationError(f"{path}:{lineno}: polarity {pol} outside [-1, 1]")
        if not 0.0 <= subj <= 1.0:
            raise ValidationError(f"{path}:{lineno}: subjectivity {subj} outside [0, 1]")
        emo_set = frozenset(e.strip() for e in emo_s.split(",") if e.strip())
        unknown = emo_set - set(EMOTIONS)
        if unknown:
            raise ValidationError(f"{path}:{lineno}: unknown emotions {sorted(unknown)}")
        polarity[word] = pol
        subjectivity[word] = subj
        emotions[word] = emo_set
    if not polarity:
        raise ValidationError(f"affect lexicon at {path} has no entries")
    return AffectLexicon(polarity=polarity, subjectivity=subjectivity, emotions=emotions)


def load_gazetteers(directory: str | Path) -> Gazetteers:
    """Load ``<label>.txt`` per NER label from a directory.

    Labels without a file get an empty entry set; entries are case-folded
    and split on whitespace so multiword names match token sequences.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ResourceError(f"gazetteer directory not found at {directory}")
    entries: dict[str, frozenset[tuple[str, ...]]] = {}
    for label in NER_LABELS:
        file = directory / f"{label.lower()}.txt"
        label_entries: set[tuple[str, ...]] = set()
        if file.is_file():
            for raw in file.read_text(encoding="utf-8").splitlines():
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                label_entries.add(tuple(w.casefold() for w in line.split()))
        entries[label] = frozenset(label_entries)
    return Gazetteers(entries=entries)


@dataclass(frozen=True)
class Resources:
    """Every lexical resource the feature extractor needs, loaded once."""

    common_words: WordList      # general high-frequency vocabulary
    academic_words: WordList    # academic register head words
    easy_words: WordList        # familiar words for the difficult-word count
    affect: AffectLexicon
    gazetteers: Gazetteers


def load_resources(
    common_words_path: str | Path,
    academic_words_path: str | Path,
    easy_words_path: str | Path,
    affect_path: str | Path,
    gazetteer_dir: str | Path,
    academic_families_path: str | Path | None = None,
) -> Resources:
    academic = load_word_list(academic_words_path, "academic_words")
    if academic_families_path is not None:
        academic = expand_word_families(academic, academic_families_path)
    return Resources(
        common_words=load_word_list(common_words_path, "common_words"),
        academic_words=academic,
        easy_words=load_word_list(easy_words_path, "easy_words"),
        affect=load_affect_lexicon(affect_path),
        gazetteers=load_gazetteers(gazetteer_dir),
    )


def default_resources() -> Resources:
    """Load the defaults bundled with the package."""
    base = default_resource_dir()
    return load_resources(
        common_words_path=base / "wordlists" / "common_words.txt",
        academic_words_path=base / "wordlists" / "academic_words.txt",
        easy_words_path=base / "wordlists" / "easy_words.txt",
        affect_path=base / "affect" / "affect_lexicon.tsv",
        gazetteer_dir=base / "gazetteers",
    )


def _tag_word(word: str, prev_word: str | None) -> str:
    w = word.casefold()
    if w in INTERROGATIVES:
        return "WDT"
    if w in PRONOUNS:
        return "PRP"
    if w in DETERMINERS:
        return "DT"
    if w in AUXILIARY_TAGS:
        return AUXILIARY_TAGS[w]
    if w in CONJUNCTIONS:
        return "CC"
    if w in PREPOSITIONS:
        return "IN"
    if w.isdigit():
        return "OTHER"
    if w.endswith("ing") and len(w) > 4:
        return "VBG"
    if w.endswith("ed") and len(w) > 3:
        if prev_word is not None and prev_word.casefold() in _PERFECT_AUX:
            return "VBN"
        return "VBD"
    if len(w) > 2 and w.endswith("s") and not w.endswith("ss"):
        for stem in _unsuffixed_s(w):
            if stem in COMMON_VERB_STEMS:
                return "VBZ"
    if w in IRREGULAR_PAST:
        if prev_word is not None and prev_word.casefold() in _PERFECT_AUX:
            return "VBN"
        return "VBD"
    return "NN"


def _unsuffixed_s(word: str) -> tuple[str, ...]:
    stems = [word[:-1]]
    if word.endswith("es"):
        stems.append(word[:-2])
    if word.endswith("ies"):
        stems.append(word[:-3] + "y")
    return tuple(stems)


def tag_pos(seg: SegmentedText) -> list[str]:
    """One tag per token, aligned with seg.tokens; marks tag OTHER."""
    tags: list[str] = []
    prev_word: str | None = None
    for tok in seg.tokens:
        if not tok.is_word:
            tags.append("OTHER")
            continue
        tags.append(_tag_word(tok.surface, prev_word))
        prev_word = tok.surface
    return tags


def _capitalized(tok: Token) -> bool:
    return tok.surface[:1].isupper()


def ner_counts(seg: SegmentedText, gazetteers: Gazetteers) -> dict[str, int]:
    """Entity mention counts per NER label.

    Longest gazetteer match wins at each position; on equal length the label
    earlier in NER_LABELS wins. After gazetteer matching, each remaining run
    of two or more adjacent capitalised words counts one PERSON mention.
    The first word of a sentence is capitalised by orthography, so it never
    contributes to a run; names that begin a sentence rely on the gazetteer.
    """
    counts = {label: 0 for label in NER_LABELS}
    max_len = gazetteers.max_entry_length()

    for lo, hi in seg.sentence_bounds:
        # word positions within this sentence, with their token indices
        word_positions = [i for i in range(lo, hi) if seg.tokens[i].is_word]
        consumed = [False] * len(word_positions)
        wsurfaces = [seg.tokens[i].surface.casefold() for i in word_positions]

        wi = 0
        while wi < len(word_positions):
            matched = False
            for n in range(min(max_len, len(word_positions) - wi), 0, -1):
                if n > 1:
                    # multiword entries require adjacent word tokens with no
                    # punctuation between them
                    token_span = word_positions[wi : wi + n]
                    if any(
                        token_span[k + 1] != token_span[k] + 1
                        for k in range(n - 1)
                    ):
                        continue
                candidate = tuple(wsurfaces[wi : wi + n])
                hit_label = None
                for label in NER_LABELS:
                    if candidate in gazetteers.entries[label]:
                        hit_label = label
                        break
                if hit_label is not None:
                    counts[hit_label] += 1
                    for k in range(wi, wi + n):
                        consumed[k] = True
                    wi += n
                    matched = True
                    break
            if not matched:
                wi += 1

        # Capitalised-run PERSON heuristic over unconsumed, non-initial words.
        wi = 1
        while wi < len(word_positions):
            if consumed[wi] or not _capitalized(seg.tokens[word_positions[wi]]):
                wi += 1
                continue
            run_start = wi
            while (
                wi < len(word_positions)
                and not consumed[wi]
                and _capitalized(seg.tokens[word_positions[wi]])
                and (wi == run_start or word_positions[wi] == word_positions[wi - 1] + 1)
            ):
                wi += 1
            run_len = wi - run_start
            # A run of two or more always contains a capitalised word that is
            # not the first word of its sentence, so it counts.
            if run_len >= 2:
                counts["PERSON"] += 1
    return counts
