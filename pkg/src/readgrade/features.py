"""The 35-feature catalog and its extraction from annotations.

Feature codes follow a fixed naming convention: ``n``-prefixed codes are
document totals, ``a``-prefixed codes are ratios (per sentence, per word,
or per noun), and the three percentage features (P3T, PND, PNS) run 0-100.

Groups, in catalog order:

* surface statistics: aWS aSPW P3T nWD
* constituency / POS counts: aNP aNN aVP aAdj aSBr aPP nNP nNN nVP nAdj nSBr nPP
* entity density: PND PNS nUE aEM aUE
* lexical chains: nLC aLCW aLCS aLCN
* word difficulty levels B-F: nBw aBw nCw aCw nDw aDw nEw aEw nFw aFw
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .annotate import Annotation
from .errors import DegenerateInputError, FormatError, ValidationError

FEATURE_CODES: tuple[str, ...] = (
    "aWS", "aSPW", "P3T", "nWD",
    "aNP", "aNN", "aVP", "aAdj", "aSBr", "aPP",
    "nNP", "nNN", "nVP", "nAdj", "nSBr", "nPP",
    "PND", "PNS", "nUE", "aEM", "aUE",
    "nLC", "aLCW", "aLCS", "aLCN",
    "nBw", "aBw", "nCw", "aCw", "nDw", "aDw",
    "nEw", "aEw", "nFw", "aFw",
)

_FEATURE_SET = frozenset(FEATURE_CODES)

# Codes whose values must be non-negative (totals and percentages).
_NONNEGATIVE = frozenset(
    c for c in FEATURE_CODES if c.startswith("n") or c in ("P3T", "PND", "PNS")
)

DIFFICULTY_LEVELS: tuple[str, ...] = ("A", "B", "C", "D", "E", "F")
_COUNTED_LEVELS: tuple[str, ...] = ("B", "C", "D", "E", "F")


@dataclass(frozen=True)
class FeatureVector:
    """All 35 feature values for one document."""

    doc_id: str
    values: dict[str, float]

    def __post_init__(self):
        missing = _FEATURE_SET - self.values.keys()
        extra = self.values.keys() - _FEATURE_SET
        if missing or extra:
            raise ValidationError(
                f"feature vector for {self.doc_id!r}: missing={sorted(missing)} "
                f"extra={sorted(extra)}"
            )
        for code, value in self.values.items():
            if not math.isfinite(value):
                raise ValidationError(f"feature {code} is not finite: {value}")
            if code in _NONNEGATIVE and value < 0:
                raise ValidationError(f"feature {code} must be >= 0, got {value}")

    def __getitem__(self, code: str) -> float:
        return self.values[code]


class DifficultyLexicon:
    """Word -> difficulty level (A-F) table.

    File format: one ``word<TAB>level`` pair per line, lowercase words.
    """

    def __init__(self, entries: dict[str, str]):
        for word, level in entries.items():
            if level not in DIFFICULTY_LEVELS:
                raise ValidationError(
                    f"difficulty level for {word!r} must be A-F, got {level!r}"
                )
        self._entries = dict(entries)

    def get(self, word: str) -> str | None:
        return self._entries.get(word)

    def __len__(self):
        return len(self._entries)

    @classmethod
    def load(cls, stream) -> "DifficultyLexicon":
        entries = {}
        for lineno, line in enumerate(stream, start=1):
            if isinstance(line, bytes):
                line = line.decode("utf-8")
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError("difficulty lexicon line needs word<TAB>level", line=lineno)
            entries[parts[0].strip().lower()] = parts[1].strip().upper()
        return cls(entries)


class Thesaurus:
    """Lemma -> synonym-group ids; a lemma may belong to several groups.

    File format: one group per line, ``group_id<TAB>lemma1,lemma2,...``.
    """

    def __init__(self, groups: dict[str, set[str]] | None = None):
        self._lemma_groups: dict[str, set[str]] = {}
        for gid, lemmas in (groups or {}).items():
            for lemma in lemmas:
                self._lemma_groups.setdefault(lemma.lower(), set()).add(gid)

    def groups_for(self, lemma: str) -> frozenset[str]:
        return frozenset(self._lemma_groups.get(lemma.lower(), ()))

    @classmethod
    def empty(cls) -> "Thesaurus":
        return cls({})

    @classmethod
    def load(cls, stream) -> "Thesaurus":
        groups: dict[str, set[str]] = {}
        for lineno, line in enumerate(stream, start=1):
            if isinstance(line, bytes):
                line = line.decode("utf-8")
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError("thesaurus line needs group_id<TAB>lemmas", line=lineno)
            gid = parts[0].strip()
            lemmas = {w.strip().lower() for w in parts[1].split(",") if w.strip()}
            groups.setdefault(gid, set()).update(lemmas)
        return cls(groups)


def _word_tokens(annotation: Annotation):
    return annotation.word_tokens()


def traditional_features(a: Annotation) -> dict[str, float]:
    """Surface statistics: words per sentence, syllables per word, polysyllable
    percentage, and document word count."""
    words = _word_tokens(a)
    n_words = len(words)
    n_sents = a.n_sentences
    if n_words == 0:
        raise DegenerateInputError(f"document {a.doc_id!r} has no word tokens")
    syllables = sum(t.syllables for t in words)
    poly = sum(1 for t in words if t.syllables >= 3)
    return {
        "aWS": n_words / n_sents,
        "aSPW": syllables / n_words,
        "P3T": 100.0 * poly / n_words,
        "nWD": float(n_words),
    }


def pos_features(a: Annotation) -> dict[str, float]:
    """Constituent counts (NP/VP/PP/SBAR at every tree depth) plus proper-noun
    and adjective token counts; ``a``-variants divide by sentence count."""
    for idx, sent in enumerate(a.sentences):
        if sent.tree is None:
            raise ValidationError(
                f"document {a.doc_id!r}: sentence {idx} has no constituency tree"
            )
    n_sents = a.n_sentences
    counts = {"NP": 0, "VP": 0, "PP": 0, "SBAR": 0}
    for sent in a.sentences:
        for node in sent.tree.walk():
            if node.label in counts:
                counts[node.label] += 1
    n_nnp = sum(1 for t in a.all_tokens() if t.pos in ("NNP", "NNPS"))
    n_adj = sum(1 for t in a.all_tokens() if t.pos in ("JJ", "JJR", "JJS"))
    return {
        "nNP": float(counts["NP"]), "aNP": counts["NP"] / n_sents,
        "nNN": float(n_nnp), "aNN": n_nnp / n_sents,
        "nVP": float(counts["VP"]), "aVP": counts["VP"] / n_sents,
        "nAdj": float(n_adj), "aAdj": n_adj / n_sents,
        "nSBr": float(counts["SBAR"]), "aSBr": counts["SBAR"] / n_sents,
        "nPP": float(counts["PP"]), "aPP": counts["PP"] / n_sents,
    }


def entity_features(a: Annotation) -> dict[str, float]:
    """Entity mention density relative to words, sentences and the document."""
    n_sents = a.n_sentences
    n_words = len(_word_tokens(a))
    mention_tokens = sum(m.n_tokens for m in a.entities)
    n_mentions = len(a.entities)
    n_unique = a.entity_count_unique

    per_sentence = []
    for s_idx, sent in enumerate(a.sentences):
        words_in_sent = len(sent.word_tokens())
        ent_tokens = sum(m.n_tokens for m in a.entities if m.sentence_index == s_idx)
        # a sentence without words contributes zero density
        per_sentence.append(100.0 * ent_tokens / words_in_sent if words_in_sent else 0.0)

    return {
        "PND": 100.0 * mention_tokens / n_words if n_words else 0.0,
        "PNS": sum(per_sentence) / n_sents if n_sents else 0.0,
        "nUE": float(n_unique),
        "aEM": n_mentions / n_sents,
        "aUE": n_unique / n_sents,
    }


@dataclass(frozen=True)
class LexicalChain:
    """A set of related noun tokens spanning the document.

    ``members`` are (sentence index, token index) positions; a chain always
    has at least two of them.
    """

    members: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValidationError("a lexical chain needs at least two members")

    def __len__(self):
        return len(self.members)


def lexical_chains(a: Annotation, thesaurus: Thesaurus) -> tuple[LexicalChain, ...]:
    """Connected components of noun tokens, document-wide.

    Two nouns link when their lemmas are equal or they share a thesaurus
    group; components with fewer than two members are not chains.
    """
    positions = [
        (s_idx, t_idx)
        for s_idx, sent in enumerate(a.sentences)
        for t_idx, tok in enumerate(sent.tokens)
        if tok.pos.startswith("NN")
    ]
    parent = list(range(len(positions)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    by_lemma: dict[str, int] = {}
    by_group: dict[str, int] = {}
    for i, (s_idx, t_idx) in enumerate(positions):
        lemma = a.sentences[s_idx].tokens[t_idx].lemma.lower()
        if lemma in by_lemma:
            union(by_lemma[lemma], i)
        else:
            by_lemma[lemma] = i
        for gid in thesaurus.groups_for(lemma):
            if gid in by_group:
                union(by_group[gid], i)
            else:
                by_group[gid] = i

    components: dict[int, list[tuple[int, int]]] = {}
    for i, position in enumerate(positions):
        components.setdefault(find(i), []).append(position)
    return tuple(
        LexicalChain(members=tuple(members))
        for _, members in sorted(components.items())
        if len(members) >= 2
    )


def lexical_chain_features(a: Annotation, thesaurus: Thesaurus) -> dict[str, float]:
    """Chain count with its per-word, per-sentence, and per-noun ratios."""
    n_nouns = sum(1 for t in a.all_tokens() if t.pos.startswith("NN"))
    n_words = len(_word_tokens(a))
    n_sents = a.n_sentences
    n_chains = len(lexical_chains(a, thesaurus))
    return {
        "nLC": float(n_chains),
        "aLCW": n_chains / n_words if n_words else 0.0,
        "aLCS": n_chains / n_sents if n_sents else 0.0,
        "aLCN": n_chains / n_nouns if n_nouns else 0.0,
    }


def word_difficulty_features(a: Annotation, lexicon: DifficultyLexicon) -> dict[str, float]:
    """Per-level word counts against the difficulty lexicon (levels B-F).

    Lookup uses the lowercase surface with the lemma as fallback; level-A
    and out-of-lexicon words contribute to no level.
    """
    words = _word_tokens(a)
    n_words = len(words)
    counts = {level: 0 for level in _COUNTED_LEVELS}
    for tok in words:
        level = lexicon.get(tok.surface.lower())
        if level is None:
            level = lexicon.get(tok.lemma.lower())
        if level in counts:
            counts[level] += 1
    out: dict[str, float] = {}
    for level in _COUNTED_LEVELS:
        out[f"n{level}w"] = float(counts[level])
        out[f"a{level}w"] = counts[level] / n_words if n_words else 0.0
    return out


def extract_all(
    a: Annotation, lexicon: DifficultyLexicon, thesaurus: Thesaurus
) -> FeatureVector:
    """Compute the full 35-feature vector for one annotated document."""
    values: dict[str, float] = {}
    values.update(traditional_features(a))
    values.update(pos_features(a))
    values.update(entity_features(a))
    values.update(lexical_chain_features(a, thesaurus))
    values.update(word_difficulty_features(a, lexicon))
    return FeatureVector(doc_id=a.doc_id, values=values)


def feature_matrix(vectors: list[FeatureVector]):
    """Stack feature vectors into a (docs x 35) list-of-rows in catalog order."""
    return [[v.values[code] for code in FEATURE_CODES] for v in vectors]
