"""Deterministic linguistic annotation and an interchange format for external tools.

Two ways to obtain an :class:`Annotation`:

* :func:`annotate_builtin` runs a fully rule-based pipeline (sentence split,
  tokenize, tag, shallow chunk, entity detection).  It is deterministic:
  equal inputs always give structurally equal annotations.
* :func:`ingest_annotation` reads externally produced annotations from a
  tab-separated token stream plus an optional bracketed-tree stream, so
  higher-quality tools can be swapped in without changing the feature code.

Token interchange format: six tab-separated columns per token
(``sentence_index  surface  lemma  pos  syllables  entity_id``) with a blank
line between sentences; ``entity_id`` is an integer or ``_``.  Tree
interchange: one parenthesis-balanced bracketed tree per sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DegenerateInputError, FormatError, ValidationError

# ---------------------------------------------------------------------------
# Data types


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    pos: str
    syllables: int
    span: tuple[int, int]
    entity_id: int | None = None

    def __post_init__(self):
        if self.span[1] <= self.span[0]:
            raise ValidationError(f"token {self.surface!r}: empty span {self.span}")
        has_letter = any(c.isalpha() for c in self.surface)
        if has_letter and self.syllables < 1:
            raise ValidationError(f"token {self.surface!r}: letter tokens need >= 1 syllable")
        if not has_letter and self.syllables != 0:
            raise ValidationError(f"token {self.surface!r}: non-letter tokens have 0 syllables")

    @property
    def is_word(self) -> bool:
        """Word tokens contain at least one letter; punctuation and digits do not count."""
        return any(c.isalpha() for c in self.surface)


@dataclass(frozen=True)
class Constituent:
    """A labeled token span within one sentence; children nest strictly."""

    label: str
    start: int
    end: int
    children: tuple["Constituent", ...] = ()

    def __post_init__(self):
        if self.end <= self.start:
            raise ValidationError(f"constituent {self.label}: empty span")
        for child in self.children:
            if child.start < self.start or child.end > self.end:
                raise ValidationError(
                    f"constituent {self.label}: child {child.label} escapes parent span"
                )

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    tree: Constituent | None = None

    def __post_init__(self):
        if not self.tokens:
            raise ValidationError("sentence must contain at least one token")

    def word_tokens(self):
        return [t for t in self.tokens if t.is_word]


@dataclass(frozen=True)
class EntityMention:
    """A maximal run of tokens referring to one entity within a sentence."""

    entity_id: int
    sentence_index: int
    start: int
    end: int
    canonical: str

    @property
    def n_tokens(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Annotation:
    doc_id: str
    sentences: tuple[Sentence, ...]
    entities: tuple[EntityMention, ...]
    entity_count_unique: int

    def __post_init__(self):
        distinct = {m.entity_id for m in self.entities}
        if len(distinct) != self.entity_count_unique:
            raise ValidationError(
                f"entity_count_unique={self.entity_count_unique} but "
                f"{len(distinct)} distinct entity ids present"
            )

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)

    def all_tokens(self):
        for sent in self.sentences:
            yield from sent.tokens

    def word_tokens(self):
        return [t for t in self.all_tokens() if t.is_word]


# ---------------------------------------------------------------------------
# Syllable counting

_VOWELS = set("aeiou")


def count_syllables(word: str) -> int:
    """Count syllables as maximal vowel groups.

    ``y`` is a vowel except word-initially.  A terminal silent ``e`` drops
    one group unless the word ends in consonant + ``le``.  Any word with a
    letter counts at least 1; inputs without letters count 0.
    """
    w = word.lower()
    if not any(c.isalpha() for c in w):
        return 0
    count = 0
    prev_vowel = False
    for i, c in enumerate(w):
        is_vowel = c in _VOWELS or (c == "y" and i > 0)
        if is_vowel and not prev_vowel:
            count += 1
        prev_vowel = is_vowel
    if w.endswith("e"):
        consonant_le = (
            len(w) >= 3 and w.endswith("le") and w[-3].isalpha() and w[-3] not in _VOWELS and w[-3] != "y"
        )
        if not consonant_le:
            count -= 1
    return max(count, 1)


# ---------------------------------------------------------------------------
# Built-in POS lexicon

# Closed-class words plus frequent irregular verb forms and short adjectives
# that the suffix rules cannot recover.
_DEFAULT_TAGS = {
    # determiners
    "the": "DT", "a": "DT", "an": "DT", "this": "DT", "these": "DT",
    "those": "DT", "some": "DT", "any": "DT", "each": "DT", "every": "DT",
    "no": "DT", "all": "DT", "both": "DT", "another": "DT",
    # prepositions and subordinators
    "of": "IN", "in": "IN", "on": "IN", "at": "IN", "by": "IN", "with": "IN",
    "from": "IN", "for": "IN", "about": "IN", "over": "IN", "under": "IN",
    "after": "IN", "before": "IN", "during": "IN", "between": "IN",
    "through": "IN", "against": "IN", "near": "IN", "into": "IN",
    "without": "IN", "within": "IN", "along": "IN", "across": "IN",
    "because": "IN", "although": "IN", "though": "IN", "while": "IN",
    "since": "IN", "if": "IN", "unless": "IN", "until": "IN",
    "whereas": "IN", "whether": "IN", "that": "IN", "as": "IN", "than": "IN",
    "so": "IN", "once": "IN",
    "to": "TO",
    # wh-words
    "when": "WRB", "whenever": "WRB", "where": "WRB", "wherever": "WRB",
    "why": "WRB", "how": "WRB", "which": "WDT", "who": "WP", "whom": "WP",
    "what": "WP", "whose": "WP$",
    # pronouns
    "i": "PRP", "you": "PRP", "he": "PRP", "she": "PRP", "it": "PRP",
    "we": "PRP", "they": "PRP", "me": "PRP", "him": "PRP", "us": "PRP",
    "them": "PRP", "himself": "PRP", "herself": "PRP", "itself": "PRP",
    "themselves": "PRP",
    "my": "PRP$", "your": "PRP$", "his": "PRP$", "her": "PRP$", "its": "PRP$",
    "our": "PRP$", "their": "PRP$",
    # conjunctions
    "and": "CC", "or": "CC", "but": "CC", "nor": "CC", "yet": "CC",
    # modals
    "can": "MD", "could": "MD", "will": "MD", "would": "MD", "shall": "MD",
    "should": "MD", "may": "MD", "might": "MD", "must": "MD",
    # be / have / do
    "am": "VBP", "is": "VBZ", "are": "VBP", "was": "VBD", "were": "VBD",
    "be": "VB", "been": "VBN", "being": "VBG",
    "have": "VBP", "has": "VBZ", "had": "VBD", "do": "VBP", "does": "VBZ",
    "did": "VBD", "done": "VBN",
    # frequent irregular verbs
    "go": "VB", "goes": "VBZ", "went": "VBD", "gone": "VBN",
    "say": "VB", "says": "VBZ", "said": "VBD",
    "see": "VB", "saw": "VBD", "seen": "VBN",
    "get": "VB", "got": "VBD", "make": "VB", "made": "VBD",
    "take": "VB", "took": "VBD", "taken": "VBN",
    "come": "VB", "came": "VBD", "know": "VB", "knew": "VBD", "known": "VBN",
    "think": "VB", "thought": "VBD", "find": "VB", "found": "VBD",
    "tell": "VB", "told": "VBD", "give": "VB", "gave": "VBD", "given": "VBN",
    "keep": "VB", "kept": "VBD", "hold": "VB", "held": "VBD",
    "leave": "VB", "left": "VBD", "meet": "VB", "met": "VBD",
    "sit": "VB", "sat": "VBD", "stand": "VB", "stood": "VBD",
    "run": "VB", "ran": "VBD", "write": "VB", "wrote": "VBD",
    "read": "VB", "eat": "VB", "ate": "VBD", "sleep": "VB", "slept": "VBD",
    "feed": "VB", "fed": "VBD", "teach": "VB", "taught": "VBD",
    "buy": "VB", "bought": "VBD", "sell": "VB", "sold": "VBD",
    "speak": "VB", "spoke": "VBD", "bring": "VB", "brought": "VBD",
    "feel": "VB", "felt": "VBD", "grow": "VB", "grew": "VBD",
    "fall": "VB", "fell": "VBD", "rise": "VB", "rose": "VBD",
    "begin": "VB", "began": "VBD", "lose": "VB", "lost": "VBD",
    "win": "VB", "won": "VBD", "send": "VB", "sent": "VBD",
    "build": "VB", "built": "VBD", "put": "VB", "let": "VB",
    # adverbs
    "not": "RB", "very": "RB", "too": "RB", "also": "RB", "just": "RB",
    "then": "RB", "now": "RB", "here": "RB", "there": "RB", "always": "RB",
    "never": "RB", "often": "RB", "soon": "RB", "still": "RB", "again": "RB",
    "well": "RB", "almost": "RB",
    # short adjectives the suffix rules miss
    "good": "JJ", "bad": "JJ", "big": "JJ", "small": "JJ", "old": "JJ",
    "new": "JJ", "young": "JJ", "long": "JJ", "short": "JJ", "high": "JJ",
    "low": "JJ", "red": "JJ", "blue": "JJ", "green": "JJ", "warm": "JJ",
    "cold": "JJ", "hot": "JJ", "nice": "JJ", "happy": "JJ", "sad": "JJ",
    "easy": "JJ", "hard": "JJ", "late": "JJ", "early": "JJ", "last": "JJ",
    "next": "JJ", "own": "JJ", "same": "JJ", "other": "JJ", "few": "JJ",
    "many": "JJ", "much": "JJ", "great": "JJ", "little": "JJ", "full": "JJ",
    "free": "JJ", "dark": "JJ", "deep": "JJ", "rich": "JJ", "poor": "JJ",
    "rare": "JJ", "wide": "JJ",
    # numerals written out
    "one": "CD", "two": "CD", "three": "CD", "four": "CD", "five": "CD",
    "six": "CD", "seven": "CD", "eight": "CD", "nine": "CD", "ten": "CD",
}

# Words that initiate a subordinate clause when followed by a verb.
SUBORDINATORS = frozenset(
    {
        "that", "because", "although", "though", "while", "since", "if",
        "unless", "until", "when", "whenever", "where", "wherever",
        "whereas", "after", "before", "once", "whether",
    }
)

# Word preceding a "." that does not end a sentence.
_ABBREVIATIONS = frozenset(
    {"mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "etc", "vs", "inc",
     "ltd", "co", "fig", "al", "eg", "ie", "approx"}
)

_IRREGULAR_NOUN_LEMMAS = {
    "men": "man", "women": "woman", "children": "child", "people": "person",
    "feet": "foot", "teeth": "tooth", "mice": "mouse",
}


class PosLexicon:
    """Read-only word -> Penn tag table with an optional built-in default.

    File format: one ``word<TAB>POS`` pair per line, lowercase words.
    """

    def __init__(self, table: dict[str, str]):
        self._table = dict(table)

    def get(self, word: str) -> str | None:
        return self._table.get(word)

    def __contains__(self, word: str) -> bool:
        return word in self._table

    def __len__(self) -> int:
        return len(self._table)

    def merged_over_default(self) -> "PosLexicon":
        table = dict(_DEFAULT_TAGS)
        table.update(self._table)
        return PosLexicon(table)

    @classmethod
    def default(cls) -> "PosLexicon":
        return cls(_DEFAULT_TAGS)

    @classmethod
    def load(cls, stream) -> "PosLexicon":
        table = {}
        for lineno, line in enumerate(stream, start=1):
            if isinstance(line, bytes):
                line = line.decode("utf-8")
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError("POS lexicon line needs word<TAB>tag", line=lineno)
            word, tag = parts
            table[word.strip().lower()] = tag.strip()
        return cls(table)


# ---------------------------------------------------------------------------
# Built-in pipeline: sentences, tokens, tags, chunks, entities

_WORD_RE = re.compile(r"\w+(?:['’\-]\w+)*")
_TOKEN_RE = re.compile(r"\w+(?:['’\-]\w+)*|\S")
_BOUNDARY_RE = re.compile(r"[.!?]+")
_TRAILING_LETTERS_RE = re.compile(r"[A-Za-z]+$")

_NP_TAGS = frozenset({"DT", "JJ", "JJR", "JJS", "NN", "NNS", "NNP", "NNPS"})
_ADJ_TAGS = frozenset({"JJ", "JJR", "JJS"})
_VERB_TAGS = frozenset({"MD", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ"})
_CLAUSE_DELIMS = frozenset({",", ";", ":"})


def _is_abbreviation(text: str, punct_start: int) -> bool:
    m = _TRAILING_LETTERS_RE.search(text[:punct_start])
    if not m:
        return False
    word = m.group()
    if word.lower() in _ABBREVIATIONS:
        return True
    # single letter preceded by a dot: initialisms such as e.g. or U.S.
    if len(word) == 1 and m.start() > 0 and text[m.start() - 1] == ".":
        return True
    return False


def _sentence_spans(text: str) -> list[tuple[int, int]]:
    """Split on {. ! ?} followed by whitespace and a capital letter."""
    spans = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        end = m.end()
        j = end
        while j < len(text) and text[j].isspace():
            j += 1
        if j == end or j >= len(text):
            continue
        if not text[j].isupper():
            continue
        if m.group().endswith(".") and _is_abbreviation(text, m.start()):
            continue
        spans.append((start, end))
        start = j
    if text[start:].strip():
        spans.append((start, len(text)))
    return spans


def _suffix_tag(surface: str, sentence_initial: bool) -> str:
    low = surface.lower()
    if low.endswith("ly") and len(low) > 3:
        return "RB"
    if low.endswith("ing") and len(low) > 4:
        return "VBG"
    if low.endswith("ed") and len(low) > 3:
        return "VBD"
    if low.endswith("s") and not low.endswith(("ss", "us", "is")) and len(low) > 3:
        return "NNS"
    if surface[0].isupper() and not sentence_initial:
        return "NNP"
    return "NN"


def _tag_token(surface: str, sentence_initial: bool, lexicon: PosLexicon) -> str:
    if not any(c.isalpha() for c in surface):
        return "CD" if surface.isdigit() else surface
    tag = lexicon.get(surface.lower())
    if tag is not None:
        return tag
    return _suffix_tag(surface, sentence_initial)


def _lemma(surface: str, pos: str) -> str:
    low = surface.lower()
    if pos in ("NNS", "NNPS"):
        if low in _IRREGULAR_NOUN_LEMMAS:
            return _IRREGULAR_NOUN_LEMMAS[low]
        if low.endswith("ies") and len(low) > 4:
            return low[:-3] + "y"
        if low.endswith(("ses", "xes", "zes", "ches", "shes")):
            return low[:-2]
        if low.endswith("s") and not low.endswith("ss"):
            return low[:-1]
    elif pos == "VBG" and low.endswith("ing") and len(low) > 5:
        return low[:-3]
    elif pos in ("VBD", "VBN") and low.endswith("ed") and len(low) > 4:
        return low[:-2]
    return low


def _chunk_spans(tags: list[str], surfaces: list[str]) -> list[tuple[str, int, int]]:
    """Shallow chunk spans over one tagged sentence, in emission priority order."""
    chunks: list[tuple[str, int, int]] = []
    n = len(tags)

    # NP: maximal DT/JJ/NN* runs with at least one non-adjective member.
    np_spans = []
    i = 0
    while i < n:
        if tags[i] in _NP_TAGS:
            j = i
            while j < n and tags[j] in _NP_TAGS:
                j += 1
            if any(tags[k] not in _ADJ_TAGS for k in range(i, j)):
                np_spans.append((i, j))
                chunks.append(("NP", i, j))
            i = j
        else:
            i += 1

    # VP: maximal verb-group runs.
    i = 0
    while i < n:
        if tags[i] in _VERB_TAGS:
            j = i
            while j < n and tags[j] in _VERB_TAGS:
                j += 1
            chunks.append(("VP", i, j))
            i = j
        else:
            i += 1

    # PP: IN immediately followed by an NP.
    np_starts = {s: e for s, e in np_spans}
    for i in range(n):
        if tags[i] == "IN" and (i + 1) in np_starts:
            chunks.append(("PP", i, np_starts[i + 1]))

    # SBAR: subordinator followed by a verb before the next clause delimiter.
    for i in range(n):
        if surfaces[i].lower() not in SUBORDINATORS:
            continue
        end = i + 1
        while end < n and surfaces[end] not in _CLAUSE_DELIMS:
            end += 1
        if end > i + 1 and any(tags[k] in _VERB_TAGS for k in range(i + 1, end)):
            chunks.append(("SBAR", i, end))

    # ADJP: maximal adjective runs (ends up nested inside NPs or standalone).
    i = 0
    while i < n:
        if tags[i] in _ADJ_TAGS:
            j = i
            while j < n and tags[j] in _ADJ_TAGS:
                j += 1
            chunks.append(("ADJP", i, j))
            i = j
        else:
            i += 1

    return chunks


def _build_tree(chunks: list[tuple[str, int, int]], n_tokens: int) -> Constituent:
    """Nest chunk spans by containment under a sentence-wide root.

    Spans that would partially overlap an already-placed span are dropped;
    emission order (NP, VP, PP, SBAR, ADJP) decides the survivor.
    """
    placed: list[tuple[str, int, int]] = []
    for label, s, e in chunks:
        ok = True
        for _, ps, pe in placed:
            disjoint = e <= ps or pe <= s
            nested = (ps <= s and e <= pe) or (s <= ps and pe <= e)
            if not disjoint and not nested:
                ok = False
                break
            if s == ps and e == pe:
                ok = False  # duplicate span: first emission wins
                break
        if ok:
            placed.append((label, s, e))

    # Sort outermost-first so a simple stack insertion builds the forest.
    placed.sort(key=lambda c: (c[1], -(c[2] - c[1])))

    class _Node:
        __slots__ = ("label", "s", "e", "children")

        def __init__(self, label, s, e):
            self.label, self.s, self.e = label, s, e
            self.children = []

    root = _Node("S", 0, n_tokens)
    stack = [root]
    for label, s, e in placed:
        while not (stack[-1].s <= s and e <= stack[-1].e):
            stack.pop()
        node = _Node(label, s, e)
        stack[-1].children.append(node)
        stack.append(node)

    def freeze(node: _Node) -> Constituent:
        return Constituent(
            label=node.label,
            start=node.s,
            end=node.e,
            children=tuple(freeze(c) for c in node.children),
        )

    return freeze(root)


def _entity_runs(surfaces: list[str], lexicon: PosLexicon) -> list[tuple[int, int]]:
    """Maximal runs of capitalized tokens.

    Sentence-initial tokens qualify only when their lowercase form is not in
    the POS lexicon, so ordinary capitalized sentence openers ("The") are
    skipped while unknown names still count.
    """

    def qualifies(i: int) -> bool:
        s = surfaces[i]
        if not s or not s[0].isupper() or not any(c.isalpha() for c in s):
            return False
        if i == 0 and s.lower() in lexicon:
            return False
        return True

    runs = []
    i = 0
    n = len(surfaces)
    while i < n:
        if qualifies(i):
            j = i
            while j < n and qualifies(j):
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def annotate_builtin(text: str, lexicon: PosLexicon | None = None, doc_id: str = "") -> Annotation:
    """Annotate Latin-script text with the deterministic built-in pipeline."""
    if not text or not text.strip():
        raise DegenerateInputError("cannot annotate empty text")
    lexicon = lexicon if lexicon is not None else PosLexicon.default()

    sentences = []
    raw_sentences = []  # (surfaces, spans, tags) per sentence, for entity pass
    for s_start, s_end in _sentence_spans(text):
        segment = text[s_start:s_end]
        surfaces = []
        spans = []
        for m in _TOKEN_RE.finditer(segment):
            surfaces.append(m.group())
            spans.append((s_start + m.start(), s_start + m.end()))
        if not surfaces:
            continue
        tags = [_tag_token(s, i == 0, lexicon) for i, s in enumerate(surfaces)]
        raw_sentences.append((surfaces, spans, tags))

    if not raw_sentences:
        raise DegenerateInputError("no sentences found in text")

    # Entity pass: assign ids by first appearance of the case-folded run.
    canonical_ids: dict[str, int] = {}
    mentions = []
    token_entity: dict[tuple[int, int], int] = {}
    for s_idx, (surfaces, _, _) in enumerate(raw_sentences):
        for start, end in _entity_runs(surfaces, lexicon):
            canonical = " ".join(surfaces[start:end]).casefold()
            if canonical not in canonical_ids:
                canonical_ids[canonical] = len(canonical_ids)
            eid = canonical_ids[canonical]
            mentions.append(EntityMention(eid, s_idx, start, end, canonical))
            for k in range(start, end):
                token_entity[(s_idx, k)] = eid

    for s_idx, (surfaces, spans, tags) in enumerate(raw_sentences):
        tokens = tuple(
            Token(
                surface=surf,
                lemma=_lemma(surf, tag),
                pos=tag,
                syllables=count_syllables(surf),
                span=span,
                entity_id=token_entity.get((s_idx, i)),
            )
            for i, (surf, span, tag) in enumerate(zip(surfaces, spans, tags))
        )
        tree = _build_tree(_chunk_spans(tags, surfaces), len(tokens))
        sentences.append(Sentence(tokens=tokens, tree=tree))

    return Annotation(
        doc_id=doc_id,
        sentences=tuple(sentences),
        entities=tuple(mentions),
        entity_count_unique=len(canonical_ids),
    )


# ---------------------------------------------------------------------------
# Interchange: bracketed trees

_PAREN_ESCAPES = {"(": "-LRB-", ")": "-RRB-"}
_PAREN_UNESCAPES = {"-LRB-": "(", "-RRB-": ")"}


def _normalize_label(label: str) -> str:
    if not label:
        return "TOP"
    for sep in ("-", "="):
        # keep leading-dash escape labels such as -LRB- intact
        if sep in label[1:]:
            label = label[0] + label[1:].split(sep, 1)[0]
    return label


def parse_bracketed_tree(line: str, sentence_index: int = 0) -> tuple[Constituent, list[str]]:
    """Parse one bracketed constituency tree.

    Returns the root constituent (token spans indexed over the leaves) and
    the leaf surfaces in order.  Preterminal nodes (a label over a single
    word) contribute a leaf but no constituent.
    """
    atoms = re.findall(r"\(|\)|[^\s()]+", line)
    if not atoms:
        raise FormatError("empty tree line", sentence=sentence_index)
    pos = 0

    def parse_node():
        nonlocal pos
        if atoms[pos] != "(":
            raise FormatError(
                f"expected '(' at tree token {pos}", sentence=sentence_index
            )
        pos += 1
        if pos >= len(atoms):
            raise FormatError("unterminated tree", sentence=sentence_index)
        label = ""
        if atoms[pos] not in ("(", ")"):
            label = atoms[pos]
            pos += 1
        children = []
        words = []
        while pos < len(atoms) and atoms[pos] != ")":
            if atoms[pos] == "(":
                children.append(parse_node())
            else:
                words.append(atoms[pos])
                pos += 1
        if pos >= len(atoms):
            raise FormatError("unbalanced brackets in tree", sentence=sentence_index)
        pos += 1  # consume ')'
        if children and words:
            raise FormatError(
                f"node {label!r} mixes words and subtrees", sentence=sentence_index
            )
        return (label, children, words)

    root = parse_node()
    if pos != len(atoms):
        raise FormatError("trailing content after tree", sentence=sentence_index)

    leaves: list[str] = []

    def convert(node) -> Constituent | None:
        label, children, words = node
        start = len(leaves)
        if words:
            for w in words:
                leaves.append(_PAREN_UNESCAPES.get(w, w))
            # single word under a label is a preterminal, not a constituent
            if len(words) == 1 and label:
                return None
        converted = []
        for child in children:
            sub = convert(child)
            if sub is not None:
                converted.append(sub)
        end = len(leaves)
        if end == start:
            raise FormatError(
                f"constituent {label!r} spans no tokens", sentence=sentence_index
            )
        return Constituent(
            label=_normalize_label(label), start=start, end=end,
            children=tuple(converted),
        )

    constituent = convert(root)
    if constituent is None:
        # root was preterminal-shaped; promote it to a one-leaf constituent
        constituent = Constituent(label=_normalize_label(root[0]), start=0, end=1)
    return constituent, leaves


def _render_tree(sentence: Sentence) -> str:
    tokens = sentence.tokens

    def leaf(i: int) -> str:
        surf = _PAREN_ESCAPES.get(tokens[i].surface, tokens[i].surface)
        tag = _PAREN_ESCAPES.get(tokens[i].pos, tokens[i].pos)
        return f"({tag} {surf})"

    def render(node: Constituent) -> str:
        parts = []
        cursor = node.start
        for child in node.children:
            parts.extend(leaf(i) for i in range(cursor, child.start))
            parts.append(render(child))
            cursor = child.end
        parts.extend(leaf(i) for i in range(cursor, node.end))
        return f"({node.label} " + " ".join(parts) + ")"

    if sentence.tree is None:
        return "(S " + " ".join(leaf(i) for i in range(len(tokens))) + ")"
    return render(sentence.tree)


# ---------------------------------------------------------------------------
# Interchange: token tables

def write_annotation_tokens(annotation: Annotation) -> str:
    """Serialize tokens to the tab-separated interchange format."""
    blocks = []
    for s_idx, sent in enumerate(annotation.sentences):
        lines = []
        for tok in sent.tokens:
            eid = "_" if tok.entity_id is None else str(tok.entity_id)
            lines.append(
                f"{s_idx}\t{tok.surface}\t{tok.lemma}\t{tok.pos}\t{tok.syllables}\t{eid}"
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def write_annotation_trees(annotation: Annotation) -> str:
    """Serialize one bracketed tree per sentence."""
    return "\n".join(_render_tree(s) for s in annotation.sentences) + "\n"


def ingest_annotation(token_stream, tree_stream=None, doc_id: str = "") -> Annotation:
    """Build an Annotation from interchange streams produced by external tools.

    The token stream must have exactly six tab-separated columns; the
    optional tree stream must supply one bracketed tree per sentence whose
    leaf count equals the sentence's token count.
    """
    text = token_stream.read() if hasattr(token_stream, "read") else token_stream
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    blocks: list[list[tuple[int, list[str]]]] = []
    current: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            if current:
                blocks.append(current)
                current = []
            continue
        parts = line.split("\t")
        if len(parts) != 6:
            raise FormatError(
                f"token line has {len(parts)} columns, expected 6",
                line=lineno, sentence=len(blocks),
            )
        current.append((lineno, parts))
    if current:
        blocks.append(current)
    if not blocks:
        raise DegenerateInputError("token stream contains no sentences")

    sentences_tokens: list[list[Token]] = []
    entity_cells: list[list[int | None]] = []
    offset = 0
    for s_idx, block in enumerate(blocks):
        tokens = []
        cells: list[int | None] = []
        for lineno, parts in block:
            sent_col, surface, lemma, pos, syll_col, eid_col = parts
            try:
                declared = int(sent_col)
            except ValueError:
                raise FormatError(
                    f"bad sentence index {sent_col!r}", line=lineno, sentence=s_idx
                ) from None
            if declared != s_idx:
                raise FormatError(
                    f"sentence index {declared} does not match block {s_idx}",
                    line=lineno, sentence=s_idx,
                )
            try:
                syllables = int(syll_col)
            except ValueError:
                raise FormatError(
                    f"bad syllable count {syll_col!r}", line=lineno, sentence=s_idx
                ) from None
            if eid_col == "_":
                eid: int | None = None
            else:
                try:
                    eid = int(eid_col)
                except ValueError:
                    raise FormatError(
                        f"bad entity id {eid_col!r}", line=lineno, sentence=s_idx
                    ) from None
            span = (offset, offset + max(len(surface), 1))
            offset = span[1] + 1  # synthetic single-space layout
            try:
                tokens.append(
                    Token(surface=surface, lemma=lemma, pos=pos,
                          syllables=syllables, span=span, entity_id=eid)
                )
            except ValidationError as exc:
                raise FormatError(str(exc), line=lineno, sentence=s_idx) from None
            cells.append(eid)
        sentences_tokens.append(tokens)
        entity_cells.append(cells)

    trees: list[Constituent | None] = [None] * len(blocks)
    if tree_stream is not None:
        tree_text = tree_stream.read() if hasattr(tree_stream, "read") else tree_stream
        if isinstance(tree_text, bytes):
            tree_text = tree_text.decode("utf-8")
        tree_lines = [ln for ln in tree_text.split("\n") if ln.strip()]
        if len(tree_lines) != len(blocks):
            raise FormatError(
                f"{len(tree_lines)} trees for {len(blocks)} sentences"
            )
        for s_idx, line in enumerate(tree_lines):
            root, leaves = parse_bracketed_tree(line, sentence_index=s_idx)
            if len(leaves) != len(sentences_tokens[s_idx]):
                raise FormatError(
                    f"tree has {len(leaves)} leaves but sentence has "
                    f"{len(sentences_tokens[s_idx])} tokens",
                    sentence=s_idx,
                )
            trees[s_idx] = root

    # Entity mentions: maximal same-id runs; ids must biject with canonicals.
    mentions = []
    id_to_canonical: dict[int, str] = {}
    canonical_to_id: dict[str, int] = {}
    for s_idx, (tokens, cells) in enumerate(zip(sentences_tokens, entity_cells)):
        i = 0
        n = len(cells)
        while i < n:
            if cells[i] is None:
                i += 1
                continue
            j = i
            while j < n and cells[j] == cells[i]:
                j += 1
            eid = cells[i]
            canonical = " ".join(t.surface for t in tokens[i:j]).casefold()
            if eid in id_to_canonical and id_to_canonical[eid] != canonical:
                raise ValidationError(
                    f"entity id {eid} used for both {id_to_canonical[eid]!r} "
                    f"and {canonical!r}"
                )
            if canonical in canonical_to_id and canonical_to_id[canonical] != eid:
                raise ValidationError(
                    f"mention {canonical!r} has conflicting entity ids "
                    f"{canonical_to_id[canonical]} and {eid}"
                )
            id_to_canonical[eid] = canonical
            canonical_to_id[canonical] = eid
            mentions.append(EntityMention(eid, s_idx, i, j, canonical))
            i = j

    sentences = tuple(
        Sentence(tokens=tuple(tokens), tree=tree)
        for tokens, tree in zip(sentences_tokens, trees)
    )
    return Annotation(
        doc_id=doc_id,
        sentences=sentences,
        entities=tuple(mentions),
        entity_count_unique=len(id_to_canonical),
    )
