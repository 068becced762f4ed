"""Correlation-based feature selection: rank, significance-filter, pair-prune.

Features are ranked by Pearson correlation against the grade labels.  A
feature is significant when its correlation strictly exceeds the threshold
(default 0.07).  Scanning in descending correlation order, a significant
feature is then included unless it correlates too strongly (default |r| >
0.90) with a feature that was already included, in which case it is marked
``paired`` and dropped, keeping the higher-correlated member of the pair.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .features import FEATURE_CODES

DEFAULT_SIGNIFICANCE_THRESHOLD = 0.07
DEFAULT_PAIR_THRESHOLD = 0.90


@dataclass(frozen=True)
class SelectionConfig:
    significance_threshold: float = DEFAULT_SIGNIFICANCE_THRESHOLD
    pair_threshold: float = DEFAULT_PAIR_THRESHOLD
    use_absolute_r: bool = False

    def __post_init__(self):
        if not (0.0 < self.significance_threshold < 1.0):
            raise ValidationError("significance_threshold must be in (0, 1)")
        if not (0.0 < self.pair_threshold < 1.0):
            raise ValidationError("pair_threshold must be in (0, 1)")


@dataclass(frozen=True)
class CorrelationRow:
    """One feature's place in the ranking.

    ``paired`` is set only on features that were dropped because of a
    high-correlation partner; ``included`` implies ``significant``.
    """

    code: str
    r: float
    significant: bool
    paired: bool = False
    included: bool = False


def pearson(x, y) -> float:
    """Population-moment Pearson correlation of two equal-length sequences."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValidationError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValidationError("need at least 2 observations")
    sx = float(x.std())
    sy = float(y.std())
    if sx == 0.0 or sy == 0.0:
        raise ValidationError("correlation undefined for a constant sequence")
    cov = float(((x - x.mean()) * (y - y.mean())).mean())
    r = cov / (sx * sy)
    return min(1.0, max(-1.0, r))


def _grade_values(grades) -> np.ndarray:
    return np.asarray(
        [g.value if hasattr(g, "value") else float(g) for g in grades], dtype=float
    )


def rank_features(
    X, grades, cfg: SelectionConfig | None = None, codes=FEATURE_CODES
) -> list[CorrelationRow]:
    """Rank feature columns by correlation with grade, descending.

    Constant columns are recorded with r=0 and not significant rather than
    raising.  Rows come back sorted by r descending (catalog order breaks
    ties); ``paired``/``included`` are left False for :func:`prune_pairs`.
    """
    cfg = cfg or SelectionConfig()
    X = np.asarray(X, dtype=float)
    y = _grade_values(grades)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValidationError(f"matrix shape {X.shape} does not match {y.size} grades")
    if X.shape[1] != len(codes):
        raise ValidationError(f"matrix has {X.shape[1]} columns for {len(codes)} codes")
    if X.shape[0] < 2:
        raise ValidationError("need at least 2 documents")
    if np.unique(y).size < 2:
        raise ValidationError("need at least 2 distinct grades")

    rows = []
    for j, code in enumerate(codes):
        try:
            r = pearson(X[:, j], y)
        except ValidationError:
            r = 0.0
        strength = abs(r) if cfg.use_absolute_r else r
        rows.append(
            CorrelationRow(code=code, r=r, significant=strength > cfg.significance_threshold)
        )
    order = {code: i for i, code in enumerate(codes)}
    rows.sort(key=lambda row: (-row.r, order[row.code]))
    return rows


def prune_pairs(
    rows: list[CorrelationRow], X, cfg: SelectionConfig | None = None, codes=FEATURE_CODES
) -> list[CorrelationRow]:
    """Greedy pair pruning over ranked rows.

    Walks the ranking top-down; each significant feature joins the included
    set unless its absolute pairwise correlation with an already-included
    feature exceeds the pair threshold.
    """
    cfg = cfg or SelectionConfig()
    X = np.asarray(X, dtype=float)
    col = {code: j for j, code in enumerate(codes)}
    included_codes: list[str] = []
    out = []
    for row in rows:
        if row.code not in col:
            raise ValidationError(f"unknown feature code {row.code!r}")
        if not row.significant:
            out.append(replace(row, paired=False, included=False))
            continue
        paired = False
        xj = X[:, col[row.code]]
        for kept in included_codes:
            xk = X[:, col[kept]]
            try:
                pairwise = abs(pearson(xj, xk))
            except ValidationError:
                continue  # constant column: no pair relation
            if pairwise > cfg.pair_threshold:
                paired = True
                break
        if paired:
            out.append(replace(row, paired=True, included=False))
        else:
            included_codes.append(row.code)
            out.append(replace(row, paired=False, included=True))
    return out


def select_features(X, grades, cfg: SelectionConfig | None = None, codes=FEATURE_CODES):
    """Rank then prune; returns (rows, included codes in rank order)."""
    cfg = cfg or SelectionConfig()
    rows = prune_pairs(rank_features(X, grades, cfg, codes), X, cfg, codes)
    return rows, [row.code for row in rows if row.included]


def _twin(code: str) -> str | None:
    if code.startswith("n"):
        return "a" + code[1:]
    if code.startswith("a"):
        return "n" + code[1:]
    return None


def replay_selection(
    entries,
    cfg: SelectionConfig | None = None,
    overrides: dict[str, bool] | None = None,
) -> tuple[list[CorrelationRow], list[str]]:
    """Re-run the include/exclude decision from declared (code, r, paired) rows.

    Used when only a published ranking is available, without the underlying
    feature matrix.  Pair partners are reconstructed from the n-/a- naming
    twins among the pair-flagged rows, keeping the higher-correlated twin.
    ``overrides`` forces per-code decisions; every override that disagrees
    with the computed rule is surfaced as a warning, as is any feature whose
    declared flags contradict the significance rule.

    Returns (rows sorted by r descending, warnings).
    """
    cfg = cfg or SelectionConfig()
    overrides = overrides or {}
    warnings: list[str] = []

    declared = [(str(code), float(r), bool(paired)) for code, r, paired in entries]
    flagged = {code: r for code, r, paired in declared if paired}
    rows = []
    for code, r, paired_flag in declared:
        strength = abs(r) if cfg.use_absolute_r else r
        significant = strength > cfg.significance_threshold
        dropped_by_pair = False
        if paired_flag:
            twin = _twin(code)
            if twin is not None and twin in flagged and flagged[twin] > r:
                dropped_by_pair = True
        include = significant and not dropped_by_pair
        if code in overrides and overrides[code] != include:
            forced = overrides[code]
            if forced and not significant:
                warnings.append(
                    f"{code}: included by override although r={r:g} is not above "
                    f"the {cfg.significance_threshold:g} threshold"
                )
            elif forced:
                warnings.append(f"{code}: included by override despite a higher-correlated pair twin")
            elif significant:
                warnings.append(
                    f"{code}: excluded by override although r={r:g} > "
                    f"{cfg.significance_threshold:g} makes it significant"
                )
            include = forced
        rows.append(
            CorrelationRow(
                code=code, r=r, significant=significant,
                paired=paired_flag and not include, included=include,
            )
        )
    rows.sort(key=lambda row: -row.r)
    return rows, warnings


def apply_selection(vector, selected) -> list[float]:
    """Project a feature vector onto the selected codes, in order."""
    selected = list(selected)
    if not selected:
        raise ValidationError("selected feature list is empty")
    if len(set(selected)) != len(selected):
        raise ValidationError("selected feature list contains duplicates")
    attr = getattr(vector, "values", None)
    values = attr if isinstance(attr, dict) else vector
    out = []
    for code in selected:
        if code not in FEATURE_CODES:
            raise ValidationError(f"unknown feature code {code!r}")
        if code not in values:
            raise ValidationError(f"feature vector is missing code {code!r}")
        out.append(float(values[code]))
    return out
