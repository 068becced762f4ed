"""Classic readability formulas used as comparison rows in the evaluation."""

from __future__ import annotations

from dataclasses import dataclass

from .annotate import Annotation
from .errors import DegenerateInputError, ValidationError

# Formula constants, kept in one place for auditability.
FLESCH_KINCAID_WORDS_PER_SENTENCE = 0.39
FLESCH_KINCAID_SYLLABLES_PER_WORD = 11.8
FLESCH_KINCAID_OFFSET = -15.59

DALE_CHALL_DIFFICULT_WEIGHT = 0.1579
DALE_CHALL_SENTENCE_WEIGHT = 0.0496
DALE_CHALL_ADJUSTMENT = 3.6365
DALE_CHALL_ADJUSTMENT_CUTOFF = 5.0  # strict: applied only when PDW > 5


@dataclass(frozen=True)
class TextStats:
    """The scalar counts both formulas consume."""

    words: int
    sentences: int
    syllables: int
    difficult_words: int

    def __post_init__(self):
        if self.sentences < 1:
            raise ValidationError("stats need at least one sentence")
        if self.words < self.sentences:
            raise ValidationError(
                f"words ({self.words}) must be >= sentences ({self.sentences})"
            )
        if self.syllables < self.words:
            raise ValidationError(
                f"syllables ({self.syllables}) must be >= words ({self.words})"
            )
        if not (0 <= self.difficult_words <= self.words):
            raise ValidationError("difficult_words must be between 0 and words")


class FamiliarWordList:
    """Lowercase word set; words outside it count as difficult.

    File format: one word per line, UTF-8.
    """

    def __init__(self, words):
        self._words = {w.strip().lower() for w in words if w.strip()}
        if not self._words:
            raise ValidationError("familiar word list must be non-empty")

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._words

    def __len__(self):
        return len(self._words)

    @classmethod
    def load(cls, stream) -> "FamiliarWordList":
        words = []
        for line in stream:
            if isinstance(line, bytes):
                line = line.decode("utf-8")
            words.append(line)
        return cls(words)


def flesch_kincaid_grade(stats: TextStats) -> float:
    """0.39 * words/sentence + 11.8 * syllables/word - 15.59; may be negative."""
    return (
        FLESCH_KINCAID_WORDS_PER_SENTENCE * stats.words / stats.sentences
        + FLESCH_KINCAID_SYLLABLES_PER_WORD * stats.syllables / stats.words
        + FLESCH_KINCAID_OFFSET
    )


def dale_chall_score(stats: TextStats) -> float:
    """0.1579 * PDW + 0.0496 * ASL, plus 3.6365 when PDW strictly exceeds 5%."""
    pdw = 100.0 * stats.difficult_words / stats.words
    asl = stats.words / stats.sentences
    score = DALE_CHALL_DIFFICULT_WEIGHT * pdw + DALE_CHALL_SENTENCE_WEIGHT * asl
    if pdw > DALE_CHALL_ADJUSTMENT_CUTOFF:
        score += DALE_CHALL_ADJUSTMENT
    return score


def stats_from_annotation(a: Annotation, familiar: FamiliarWordList) -> TextStats:
    """Counts per the annotation's word/syllable definitions.

    Difficult words are word tokens whose lowercase surface is not in the
    familiar list.
    """
    words = a.word_tokens()
    if not words:
        raise DegenerateInputError(f"document {a.doc_id!r} has no word tokens")
    return TextStats(
        words=len(words),
        sentences=a.n_sentences,
        syllables=sum(t.syllables for t in words),
        difficult_words=sum(1 for t in words if t.surface not in familiar),
    )
