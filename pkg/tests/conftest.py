import json
from pathlib import Path

import pytest

from readgrade import DifficultyLexicon, Thesaurus, ingest_annotation

FIXTURES = Path(__file__).parent / "data" / "fixtures"
GOLDEN_NAMES = ("golden1", "golden2", "golden3", "golden4", "golden5")


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def difficulty_lexicon() -> DifficultyLexicon:
    with open(FIXTURES / "difficulty.tsv") as fp:
        return DifficultyLexicon.load(fp)


@pytest.fixture(scope="session")
def thesaurus() -> Thesaurus:
    with open(FIXTURES / "thesaurus.tsv") as fp:
        return Thesaurus.load(fp)


@pytest.fixture(scope="session")
def golden_annotations():
    out = {}
    for name in GOLDEN_NAMES:
        out[name] = ingest_annotation(
            (FIXTURES / f"{name}.tokens").read_text(),
            (FIXTURES / f"{name}.trees").read_text(),
            doc_id=name,
        )
    return out


@pytest.fixture(scope="session")
def golden_values():
    raw = json.loads((FIXTURES / "goldens.json").read_text())
    return {
        name: {code: num / den for code, (num, den) in table.items()}
        for name, table in raw.items()
        if name in GOLDEN_NAMES
    }
