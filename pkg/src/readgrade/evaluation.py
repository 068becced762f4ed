"""Per-grade evaluation report: group means, average error, monotonicity.

The average assessment error of a prediction column is the unweighted mean,
over grade groups, of the absolute difference between the group's mean
prediction and its true grade value.  Values are kept at full precision and
rounded to two decimals only when a report is rendered.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

from .corpus import GradeLevel
from .errors import ValidationError


@dataclass(frozen=True)
class GradeGroupResult:
    grade: GradeLevel
    n_docs: int
    mean_prediction: float

    def __post_init__(self):
        if self.n_docs < 1:
            raise ValidationError("a grade group must contain at least one document")


@dataclass(frozen=True)
class EvalTable:
    rows: tuple[GradeGroupResult, ...]
    avg_error: float
    monotone: bool

    @classmethod
    def from_rows(cls, rows) -> "EvalTable":
        rows = tuple(rows)
        return cls(rows=rows, avg_error=avg_error(rows), monotone=monotonicity(rows))

    @classmethod
    def from_predictions(cls, preds) -> "EvalTable":
        return cls.from_rows(per_grade_means(preds))

    @property
    def grades(self) -> tuple[GradeLevel, ...]:
        return tuple(row.grade for row in self.rows)


def _as_grade(g) -> GradeLevel:
    return g if isinstance(g, GradeLevel) else GradeLevel.from_value(g)


def per_grade_means(preds) -> list[GradeGroupResult]:
    """Group (true grade, predicted value) pairs and average per group.

    Rows come back sorted by grade ascending.
    """
    pairs = [(_as_grade(g), float(p)) for g, p in preds]
    if not pairs:
        raise ValidationError("no predictions to evaluate")
    groups: dict[GradeLevel, list[float]] = {}
    for grade, pred in pairs:
        groups.setdefault(grade, []).append(pred)
    return [
        GradeGroupResult(grade=g, n_docs=len(vals), mean_prediction=sum(vals) / len(vals))
        for g, vals in sorted(groups.items())
    ]


def avg_error(rows) -> float:
    """Mean over grade groups of |mean prediction - grade value|."""
    rows = list(rows)
    if not rows:
        raise ValidationError("average error needs at least one grade row")
    return sum(abs(row.mean_prediction - row.grade.value) for row in rows) / len(rows)


def monotonicity(rows) -> bool:
    """True when group means strictly increase with grade (vacuous for one row)."""
    rows = list(rows)
    return all(
        rows[i].mean_prediction < rows[i + 1].mean_prediction
        for i in range(len(rows) - 1)
    )


def render_report(tables, fmt: str = "table") -> str:
    """Render named eval tables side by side; ``fmt`` is ``table`` or ``csv``.

    All tables must cover the same grade rows.  Numbers render at two
    decimals; the final row carries each column's average error.
    """
    tables = list(tables)
    if not tables:
        raise ValidationError("no tables to render")
    grades = tables[0][1].grades
    for name, table in tables:
        if table.grades != grades:
            raise ValidationError(
                f"table {name!r} covers grades "
                f"{[g.label for g in table.grades]}, expected {[g.label for g in grades]}"
            )
    names = [name for name, _ in tables]

    if fmt == "csv":
        out = io.StringIO()
        out.write(",".join(["grade", "n_docs"] + names) + "\n")
        for i, grade in enumerate(grades):
            cells = [grade.label, str(tables[0][1].rows[i].n_docs)]
            cells += [f"{t.rows[i].mean_prediction:.2f}" for _, t in tables]
            out.write(",".join(cells) + "\n")
        out.write(",".join(["avg_error", ""] + [f"{t.avg_error:.2f}" for _, t in tables]) + "\n")
        return out.getvalue()

    if fmt != "table":
        raise ValidationError(f"unknown report format {fmt!r}")

    header = ["grade"] + names
    body = []
    for i, grade in enumerate(grades):
        body.append([grade.label] + [f"{t.rows[i].mean_prediction:.2f}" for _, t in tables])
    body.append(["Avg Er."] + [f"{t.avg_error:.2f}" for _, t in tables])
    widths = [
        max(len(header[c]), *(len(row[c]) for row in body)) for c in range(len(header))
    ]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for row in body:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
