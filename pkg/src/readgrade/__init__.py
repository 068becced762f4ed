"""Curriculum-aware text readability assessment.

Extracts 35 linguistic features from annotated English texts, selects
features by correlation with grade labels, trains a multinomial
logistic-regression grade classifier, and evaluates it against classic
readability formulas with a per-grade mean / average-error report.
"""

from .annotate import (
    Annotation,
    Constituent,
    EntityMention,
    PosLexicon,
    Sentence,
    Token,
    annotate_builtin,
    count_syllables,
    ingest_annotation,
)
from .baselines import (
    FamiliarWordList,
    TextStats,
    dale_chall_score,
    flesch_kincaid_grade,
    stats_from_annotation,
)
from .corpus import (
    CleanReport,
    Corpus,
    Document,
    GRADES,
    GradeLevel,
    clean_document,
    dump_corpus,
    histogram,
    load_corpus,
    stratified_split,
)
from .errors import (
    DegenerateInputError,
    DivergenceError,
    FormatError,
    ModelFormatError,
    ReadgradeError,
    ValidationError,
)
from .evaluation import (
    EvalTable,
    GradeGroupResult,
    avg_error,
    monotonicity,
    per_grade_means,
    render_report,
)
from .features import (
    DifficultyLexicon,
    FEATURE_CODES,
    FeatureVector,
    Thesaurus,
    LexicalChain,
    entity_features,
    extract_all,
    lexical_chain_features,
    lexical_chains,
    pos_features,
    traditional_features,
    word_difficulty_features,
)
from .model import (
    GradeModel,
    GradePosterior,
    Standardizer,
    TrainConfig,
    apply_standardizer,
    fit_standardizer,
    load_model,
    loss_and_gradient,
    predict_grade,
    predict_posterior,
    save_model,
    train,
)
from .selection import (
    CorrelationRow,
    SelectionConfig,
    apply_selection,
    pearson,
    prune_pairs,
    rank_features,
    replay_selection,
    select_features,
)

__version__ = "0.1.0"
