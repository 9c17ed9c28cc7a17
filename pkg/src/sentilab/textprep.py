"""Deterministic tweet-cleaning pipeline.

The pipeline lowercases, aliases emoji, strips mentions/hashtags/links,
expands contractions, removes non-alphabetic characters, tokenizes,
collapses character elongations against a dictionary, and removes
stopwords while keeping negations.  A stem + coarse part-of-speech path
supports synset-style lexicon lookup.

All steps are pure functions of (text, config); identical inputs produce
identical outputs on every platform.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from .errors import InvalidConfig

DEFAULT_STEPS: Tuple[str, ...] = (
    "normalize_case",
    "demojize",
    "strip_noise",
    "expand_contractions",
    "strip_non_alpha",
    "tokenize",
    "normalize_repeats",
    "remove_stopwords",
)

_STRING_STEPS = {"normalize_case", "demojize", "strip_noise", "expand_contractions", "strip_non_alpha"}
_TOKEN_STEPS = {"normalize_repeats", "remove_stopwords"}

POS_TAGS = ("noun", "verb", "adjective", "adverb", "other")


@dataclass
class RawDocument:
    id: str
    text: str
    meta: Optional[Dict[str, str]] = None
    label: Optional[int] = None


@dataclass
class CleanDocument:
    id: str
    tokens: List[str]

    @property
    def joined(self) -> str:
        return " ".join(self.tokens)


@dataclass
class TaggedToken:
    surface: str
    stem: str
    pos: str


@dataclass
class PrepConfig:
    stopword_list: Set[str]
    negation_whitelist: Set[str]
    contraction_table: Dict[str, str]
    emoji_table: Dict[str, str]
    dictionary: Set[str]
    min_token_len: int = 2
    steps: Tuple[str, ...] = DEFAULT_STEPS
    _contraction_re: Optional[re.Pattern] = field(default=None, repr=False, compare=False)
    _emoji_re: Optional[re.Pattern] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.min_token_len < 1:
            raise InvalidConfig("min_token_len must be >= 1")
        unknown = set(self.steps) - _STRING_STEPS - _TOKEN_STEPS - {"tokenize"}
        if unknown:
            raise InvalidConfig(f"unknown pipeline steps: {sorted(unknown)}")
        if self.steps.count("tokenize") != 1:
            raise InvalidConfig("step list must contain 'tokenize' exactly once")
        cut = self.steps.index("tokenize")
        if set(self.steps[:cut]) - _STRING_STEPS or set(self.steps[cut + 1 :]) - _TOKEN_STEPS:
            raise InvalidConfig("string steps must precede 'tokenize'; token steps must follow it")
        for key in self.contraction_table:
            if "'" not in key:
                raise InvalidConfig(f"contraction key without apostrophe: {key!r}")

    def contraction_pattern(self) -> Optional[re.Pattern]:
        if self._contraction_re is None and self.contraction_table:
            keys = sorted(self.contraction_table, key=len, reverse=True)
            alt = "|".join(re.escape(k) for k in keys)
            self._contraction_re = re.compile(rf"(?<![a-z'])(?:{alt})(?![a-z'])")
        return self._contraction_re

    def emoji_pattern(self) -> Optional[re.Pattern]:
        if self._emoji_re is None and self.emoji_table:
            keys = sorted(self.emoji_table, key=len, reverse=True)
            self._emoji_re = re.compile("|".join(re.escape(k) for k in keys))
        return self._emoji_re


# -- asset loading -------------------------------------------------------------


def _data_text(name: str) -> str:
    return resources.files("sentilab.data").joinpath(name).read_text(encoding="utf-8")


def load_token_lines(text: str) -> List[str]:
    return [line.strip() for line in text.splitlines() if line.strip()]


def load_tsv_table(text: str) -> Dict[str, str]:
    table = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("\t")
        table[key] = value.strip()
    return table


def default_config(**overrides) -> PrepConfig:
    """PrepConfig backed by the data files shipped with the package."""
    fields = dict(
        stopword_list=set(load_token_lines(_data_text("stopwords.txt"))),
        negation_whitelist=set(load_token_lines(_data_text("negations.txt"))),
        contraction_table=load_tsv_table(_data_text("contractions.tsv")),
        emoji_table=load_tsv_table(_data_text("emoji_aliases.tsv")),
        dictionary=set(load_token_lines(_data_text("dictionary.txt"))),
    )
    fields.update(overrides)
    return PrepConfig(**fields)


def default_pos_lexicon() -> Dict[str, str]:
    return load_tsv_table(_data_text("pos_lexicon.tsv"))


# -- string-level steps ----------------------------------------------------------

_WS_RE = re.compile(r"\s+")


def normalize_case(text: str) -> str:
    """Locale-independent lowercasing; idempotent."""
    return text.lower()


def strip_noise(text: str) -> str:
    """Remove mention/hashtag/link tokens; collapse whitespace."""
    kept = [
        tok
        for tok in text.split()
        if not (tok.startswith("#") or tok.startswith("@") or tok.startswith(("www", "http")))
    ]
    return " ".join(kept)


def expand_contractions(text: str, table: Mapping[str, str], pattern: Optional[re.Pattern] = None) -> str:
    """Replace whole-token contraction occurrences with their expansions.

    Curly apostrophes are normalized to ASCII first; words with apostrophes
    not in the table are left alone.
    """
    if not table:
        return text
    text = text.replace("’", "'")
    if pattern is None:
        keys = sorted(table, key=len, reverse=True)
        pattern = re.compile(rf"(?<![a-z'])(?:{'|'.join(re.escape(k) for k in keys)})(?![a-z'])")
    return pattern.sub(lambda m: table[m.group(0)], text)


def demojize(text: str, emoji_table: Mapping[str, str], pattern: Optional[re.Pattern] = None) -> str:
    """Replace known emoji sequences with space-delimited alias tokens."""
    if not emoji_table:
        return text
    if pattern is None:
        keys = sorted(emoji_table, key=len, reverse=True)
        pattern = re.compile("|".join(re.escape(k) for k in keys))
    replaced = pattern.sub(lambda m: f" {emoji_table[m.group(0)]} ", text)
    return _WS_RE.sub(" ", replaced).strip()


_NON_ALPHA_RE = re.compile(r"[^a-z_ ]+")


def strip_non_alpha(text: str) -> str:
    """Keep only [a-z], underscore, and space; collapse whitespace."""
    return _WS_RE.sub(" ", _NON_ALPHA_RE.sub(" ", text)).strip()


# -- token-level steps -------------------------------------------------------------

_REPEAT_RE = re.compile(r"(.)\1{2,}")


def normalize_repeats(token: str, dictionary: Set[str]) -> str:
    """Collapse character runs of length >= 3 until a dictionary hit.

    Runs are first shortened to two characters, then to one; the first form
    found in the dictionary wins, otherwise the fully collapsed form is
    returned.  Dictionary members pass through unchanged.
    """
    if token in dictionary or not _REPEAT_RE.search(token):
        return token
    two = _REPEAT_RE.sub(lambda m: m.group(1) * 2, token)
    if two in dictionary:
        return two
    one = _REPEAT_RE.sub(lambda m: m.group(1), token)
    if one in dictionary:
        return one
    return one


def remove_stopwords(tokens: Iterable[str], config: PrepConfig) -> List[str]:
    """Drop stopwords and too-short tokens; whitelisted negations survive both."""
    out = []
    for tok in tokens:
        if tok in config.negation_whitelist:
            out.append(tok)
        elif tok not in config.stopword_list and len(tok) >= config.min_token_len:
            out.append(tok)
    return out


# -- corpus-level -------------------------------------------------------------------


def dedupe_and_drop_empty(corpus: Iterable[CleanDocument]) -> List[CleanDocument]:
    """Remove zero-token documents; keep only the first of each duplicate text."""
    seen: Set[str] = set()
    out = []
    for doc in corpus:
        if not doc.tokens:
            continue
        key = doc.joined
        if key in seen:
            continue
        seen.add(key)
        out.append(doc)
    return out


# -- pipeline ------------------------------------------------------------------------


def run_pipeline(doc: RawDocument, config: PrepConfig) -> CleanDocument:
    """Apply the configured cleaning steps, in order, to one document."""
    text = doc.text
    tokens: List[str] = []
    tokenized = False
    for step in config.steps:
        if step == "normalize_case":
            text = normalize_case(text)
        elif step == "demojize":
            text = demojize(text, config.emoji_table, config.emoji_pattern())
        elif step == "strip_noise":
            text = strip_noise(text)
        elif step == "expand_contractions":
            text = expand_contractions(text, config.contraction_table, config.contraction_pattern())
        elif step == "strip_non_alpha":
            text = strip_non_alpha(text)
        elif step == "tokenize":
            tokens = text.split()
            tokenized = True
        elif step == "normalize_repeats":
            tokens = [normalize_repeats(t, config.dictionary) for t in tokens]
        elif step == "remove_stopwords":
            tokens = remove_stopwords(tokens, config)
    if not tokenized:  # unreachable with a validated config
        raise InvalidConfig("pipeline did not tokenize")
    return CleanDocument(id=doc.id, tokens=tokens)


def run_corpus(corpus: Iterable[RawDocument], config: PrepConfig, dedupe: bool = True) -> List[CleanDocument]:
    cleaned = [run_pipeline(doc, config) for doc in corpus]
    return dedupe_and_drop_empty(cleaned) if dedupe else cleaned


# -- Porter-style stemming --------------------------------------------------------------

_VOWELS = "aeiou"


def _is_cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        if _is_cons(stem, i):
            if prev_vowel:
                m += 1
            prev_vowel = False
        else:
            prev_vowel = True
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(stem: str) -> bool:
    return len(stem) >= 2 and stem[-1] == stem[-2] and _is_cons(stem, len(stem) - 1)


def _ends_cvc(stem: str) -> bool:
    if len(stem) < 3:
        return False
    return (
        _is_cons(stem, len(stem) - 3)
        and not _is_cons(stem, len(stem) - 2)
        and _is_cons(stem, len(stem) - 1)
        and stem[-1] not in "wxy"
    )


_STEP2 = (
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
)

_STEP3 = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
)

_STEP4 = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def porter_stem(word: str) -> str:
    """Classic suffix-stripping stem of a lowercase word.

    Words of length <= 2 are returned unchanged.
    """
    if len(word) <= 2:
        return word

    # step 1a
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies"):
        word = word[:-2]
    elif not word.endswith("ss") and word.endswith("s"):
        word = word[:-1]

    # step 1b
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            word = word[:-1]
    else:
        stripped = None
        if word.endswith("ed") and _has_vowel(word[:-2]):
            stripped = word[:-2]
        elif word.endswith("ing") and _has_vowel(word[:-3]):
            stripped = word[:-3]
        if stripped is not None:
            word = stripped
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _ends_double_cons(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _measure(word) == 1 and _ends_cvc(word):
                word += "e"

    # step 1c
    if word.endswith("y") and _has_vowel(word[:-1]):
        word = word[:-1] + "i"

    # step 2
    for suffix, repl in _STEP2:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > 0:
                word = stem + repl
            break

    # step 3
    for suffix, repl in _STEP3:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > 0:
                word = stem + repl
            break

    # step 4
    for suffix in _STEP4:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > 1:
                if suffix == "ion" and (not stem or stem[-1] not in "st"):
                    break
                word = stem
            break

    # step 5a
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem

    # step 5b
    if _measure(word) > 1 and _ends_double_cons(word) and word.endswith("l"):
        word = word[:-1]

    return word


# -- coarse POS tagging ---------------------------------------------------------------

_SUFFIX_POS_RULES: Tuple[Tuple[str, str], ...] = (
    ("ly", "adverb"),
    ("ing", "verb"),
    ("ed", "verb"),
    ("ize", "verb"),
    ("ise", "verb"),
    ("ify", "verb"),
    ("ous", "adjective"),
    ("ful", "adjective"),
    ("ive", "adjective"),
    ("able", "adjective"),
    ("ible", "adjective"),
    ("less", "adjective"),
    ("ish", "adjective"),
    ("al", "adjective"),
    ("ic", "adjective"),
    ("ness", "noun"),
    ("ment", "noun"),
    ("tion", "noun"),
    ("sion", "noun"),
    ("ity", "noun"),
    ("ism", "noun"),
)


def coarse_pos(token: str, tag_lexicon: Mapping[str, str]) -> str:
    """Lexicon lookup, then suffix rules, then noun."""
    tag = tag_lexicon.get(token)
    if tag in POS_TAGS:
        return tag
    for suffix, pos in _SUFFIX_POS_RULES:
        if len(token) > len(suffix) + 1 and token.endswith(suffix):
            return pos
    return "noun"


def stem_and_tag(tokens: Iterable[str], tag_lexicon: Optional[Mapping[str, str]] = None) -> List[TaggedToken]:
    """Porter-style stem plus coarse POS tag for each token."""
    if tag_lexicon is None:
        tag_lexicon = default_pos_lexicon()
    return [TaggedToken(surface=t, stem=porter_stem(t), pos=coarse_pos(t, tag_lexicon)) for t in tokens]
