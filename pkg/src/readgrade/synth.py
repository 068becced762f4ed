"""Seeded synthetic corpus generator.

Produces grade-labeled documents whose linguistic properties scale with the
grade: higher grades get longer sentences, heavier vocabulary, more entity
mentions, more prepositional phrases and more subordinate clauses.  The
generator also emits every resource file the pipeline needs (difficulty
lexicon, thesaurus, familiar-word list, POS lexicon), so training and
evaluation can run with zero external data.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .corpus import Corpus, Document, GRADES

_NOUNS = {
    "A": ["cat", "dog", "sun", "boat", "road", "hand", "door", "fish", "bird",
          "song", "wind", "farm", "rain", "snow", "bread", "house", "path",
          "stone", "lake", "hill", "town"],
    "B": ["garden", "window", "market", "teacher", "letter", "valley",
          "morning", "picture", "winter", "summer", "river", "meadow",
          "harbor", "village", "cousin", "dinner", "candle", "corner",
          "ladder", "butter"],
    "C": ["journey", "library", "history", "station", "science", "mountain",
          "festival", "museum", "passenger", "audience", "tradition",
          "opinion", "holiday", "medicine", "distance", "instrument"],
    "D": ["ambition", "strategy", "analysis", "property", "decision",
          "territory", "economy", "material", "argument", "evidence",
          "authority", "community", "industry", "procedure"],
    "E": ["hypothesis", "phenomenon", "literature", "philosophy", "democracy",
          "apparatus", "curriculum", "anatomy", "bureaucracy", "catastrophe",
          "geometry", "laboratory", "university", "legislation"],
    "F": ["epistemology", "jurisprudence", "historiography", "juxtaposition",
          "phenomenology", "anthropology", "sustainability", "globalization",
          "individuality", "institutionalism"],
}

_EASY_VERBS = ["walked", "jumped", "played", "watched", "opened", "lifted",
               "carried", "painted", "cleaned", "washed", "helped", "pushed",
               "pulled", "crossed"]
_HARD_VERBS = ["explained", "studied", "examined", "discussed", "developed",
               "described", "investigated", "demonstrated", "evaluated",
               "interpreted", "formulated", "documented", "negotiated",
               "synthesized"]

_EASY_ADJS = ["big", "old", "red", "warm", "cold", "small", "new", "young",
              "quiet", "simple", "bright", "gentle", "golden"]
_HARD_ADJS = ["intricate", "elaborate", "formidable", "meticulous",
              "persistent", "substantial", "ambiguous", "elusive",
              "pragmatic", "rigorous"]

_NAMES = ["Alice", "Bob", "Clara", "Daniel", "Emma", "Felix", "Grace",
          "Henry", "Iris", "Jonas", "Karen", "Leo", "Mina", "Noah", "Olga",
          "Peter", "Rosa", "Simon", "Tara", "Victor"]

_SYNONYM_GROUPS = [
    ("syn-road", ["road", "path"]),
    ("syn-water", ["river", "lake"]),
    ("syn-town", ["town", "village"]),
    ("syn-hill", ["hill", "mountain"]),
    ("syn-school", ["teacher", "curriculum"]),
]

_FUNCTION_WORDS = ["the", "a", "an", "and", "in", "near", "with", "because",
                   "while", "although"]

_LEVEL_ORDER = ("A", "B", "C", "D", "E", "F")


@dataclass(frozen=True)
class SynthArtifacts:
    """A generated corpus plus the resource tables the pipeline consumes."""

    corpus: Corpus
    difficulty_entries: dict[str, str]
    thesaurus_groups: list[tuple[str, list[str]]]
    familiar_words: list[str]
    pos_entries: dict[str, str]


class _DocBuilder:
    def __init__(self, rng: random.Random, grade_index: int):
        self.rng = rng
        k = grade_index
        self.level_weights = [
            math.exp(-((lvl - k * 5.0 / 6.0) ** 2) / 1.6) for lvl in range(6)
        ]
        self.adj_p = 0.10 + 0.10 * k
        self.pp_p = 0.15 + 0.09 * k
        self.sbar_p = 0.04 + 0.10 * k
        self.entity_p = 0.08 + 0.09 * k
        self.coord_p = 0.05 * k
        self.hard_verb_p = k / 6.0
        self.n_sentences = 6 + k + rng.randrange(3)
        self.used_nouns: list[str] = []

    def noun(self) -> str:
        # re-use an earlier noun a quarter of the time so lexical chains form
        if self.used_nouns and self.rng.random() < 0.25:
            return self.rng.choice(self.used_nouns)
        level = self.rng.choices(_LEVEL_ORDER, weights=self.level_weights, k=1)[0]
        word = self.rng.choice(_NOUNS[level])
        self.used_nouns.append(word)
        return word

    def verb(self) -> str:
        pool = _HARD_VERBS if self.rng.random() < self.hard_verb_p else _EASY_VERBS
        return self.rng.choice(pool)

    def adjective(self) -> str:
        pool = _HARD_ADJS if self.rng.random() < self.hard_verb_p else _EASY_ADJS
        return self.rng.choice(pool)

    def noun_phrase(self) -> list[str]:
        words = ["the"]
        if self.rng.random() < self.adj_p:
            words.append(self.adjective())
        words.append(self.noun())
        return words

    def clause(self) -> list[str]:
        words = self.noun_phrase() + [self.verb()] + self.noun_phrase()
        if self.rng.random() < self.pp_p:
            words += [self.rng.choice(["in", "near"])] + self.noun_phrase()
        return words

    def sentence(self) -> str:
        if self.rng.random() < self.entity_p:
            words = [self.rng.choice(_NAMES), self.verb()] + self.noun_phrase()
            if self.rng.random() < 0.5:
                words += ["with", self.rng.choice(_NAMES)]
        else:
            words = self.clause()
        if self.rng.random() < self.sbar_p:
            words += ["because"] + self.clause()
        if self.rng.random() < self.coord_p:
            words += [",", "and"] + self.clause()
        text = " ".join(words).replace(" ,", ",")
        return text[0].upper() + text[1:] + "."

    def build(self) -> str:
        return " ".join(self.sentence() for _ in range(self.n_sentences))


def generate(seed: int, docs_per_grade: int = 100) -> SynthArtifacts:
    """Generate a stratified corpus with ``docs_per_grade`` documents per grade."""
    rng = random.Random(seed)
    docs = []
    for grade_index, grade in enumerate(GRADES):
        for d in range(docs_per_grade):
            builder = _DocBuilder(rng, grade_index)
            docs.append(
                Document(
                    id=f"synth-{grade.label}-{d:04d}",
                    text=builder.build(),
                    grade=grade,
                    source="synth",
                )
            )

    difficulty = {}
    for level, words in _NOUNS.items():
        for word in words:
            difficulty[word] = level
    for word in _EASY_VERBS:
        difficulty[word] = "A"
    for word in _HARD_VERBS:
        difficulty[word] = "D"
    for word in _EASY_ADJS:
        difficulty[word] = "A"
    for word in _HARD_ADJS:
        difficulty[word] = "E"

    familiar = sorted(
        set(_FUNCTION_WORDS)
        | set(_NOUNS["A"])
        | set(_NOUNS["B"])
        | set(_EASY_VERBS)
        | set(_EASY_ADJS)
        | {name.lower() for name in _NAMES}
    )

    pos_entries = {}
    for words in _NOUNS.values():
        for word in words:
            pos_entries[word] = "NN"
    for word in _EASY_VERBS + _HARD_VERBS:
        pos_entries[word] = "VBD"
    for word in _EASY_ADJS + _HARD_ADJS:
        pos_entries[word] = "JJ"

    return SynthArtifacts(
        corpus=Corpus(tuple(docs)),
        difficulty_entries=difficulty,
        thesaurus_groups=[(gid, list(words)) for gid, words in _SYNONYM_GROUPS],
        familiar_words=familiar,
        pos_entries=pos_entries,
    )
