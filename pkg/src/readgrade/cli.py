"""Command-line front end.

Subcommands: ``annotate extract select train predict score evaluate pipeline
synth``.  Every stage reads and writes plain text artifacts (JSON lines, CSV,
annotation interchange files) under the output directory so each intermediate
is inspectable and diffable.  Stage outputs are written to a temporary path
and renamed only on success.

When ``test_fraction`` is set, all stages derive the same deterministic
stratified split from (corpus, fraction, seed): selection and training see
the training half, while prediction, scoring and evaluation see the held-out
half.  Exit codes: 0 success, 1 validation or data error, 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import urllib.parse
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import annotate as ann
from . import baselines as bl
from . import evaluation as ev
from . import model as mdl
from . import selection as sel
from .corpus import Corpus, GradeLevel, clean_document, dump_corpus, load_corpus, stratified_split
from .errors import ReadgradeError, ValidationError
from .features import (
    FEATURE_CODES,
    DifficultyLexicon,
    FeatureVector,
    Thesaurus,
    extract_all,
)
from .synth import generate as synth_generate


@dataclass
class PipelineConfig:
    corpus: Path | None = None
    difficulty_lexicon: Path | None = None
    thesaurus: Path | None = None
    familiar_words: Path | None = None
    pos_lexicon: Path | None = None
    annotations_dir: Path | None = None
    model_file: Path | None = None
    out_dir: Path = Path("out")
    annotation_mode: str = "builtin"
    test_fraction: float = 0.0
    seed: int = 0
    selection: sel.SelectionConfig = field(default_factory=sel.SelectionConfig)
    train: mdl.TrainConfig = field(default_factory=mdl.TrainConfig)

    def resolved_model_file(self) -> Path:
        return self.model_file if self.model_file else self.out_dir / "model.json"


_CONFIG_PATH_KEYS = {
    "corpus", "difficulty_lexicon", "thesaurus", "familiar_words",
    "pos_lexicon", "annotations_dir", "model_file", "out_dir",
}
_CONFIG_KEYS = _CONFIG_PATH_KEYS | {
    "annotation_mode", "test_fraction", "seed",
    "significance_threshold", "pair_threshold", "use_absolute_r",
    "learning_rate", "epochs", "l2_lambda", "tolerance",
}


def parse_config_file(path: Path) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}: line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValidationError(f"{path}: line {lineno}: unknown config key {key!r}")
        entries[key] = value
    return entries


def _parse_bool(value: str) -> bool:
    low = value.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValidationError(f"expected a boolean, got {value!r}")


def build_config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    entries: dict[str, str] = {}
    if getattr(args, "config", None):
        config_path = Path(args.config)
        if not config_path.exists():
            raise ValidationError(f"config file does not exist: {config_path}")
        entries = parse_config_file(config_path)
        base = config_path.parent

        def as_path(value: str) -> Path:
            p = Path(value)
            return p if p.is_absolute() else base / p

        for key in _CONFIG_PATH_KEYS & entries.keys():
            setattr(cfg, key, as_path(entries[key]))
        if "annotation_mode" in entries:
            cfg.annotation_mode = entries["annotation_mode"]
        if "test_fraction" in entries:
            cfg.test_fraction = float(entries["test_fraction"])
        if "seed" in entries:
            cfg.seed = int(entries["seed"])
        sel_kwargs = {}
        if "significance_threshold" in entries:
            sel_kwargs["significance_threshold"] = float(entries["significance_threshold"])
        if "pair_threshold" in entries:
            sel_kwargs["pair_threshold"] = float(entries["pair_threshold"])
        if "use_absolute_r" in entries:
            sel_kwargs["use_absolute_r"] = _parse_bool(entries["use_absolute_r"])
        if sel_kwargs:
            cfg.selection = replace(cfg.selection, **sel_kwargs)
        train_kwargs = {}
        if "learning_rate" in entries:
            train_kwargs["learning_rate"] = float(entries["learning_rate"])
        if "epochs" in entries:
            train_kwargs["epochs"] = int(entries["epochs"])
        if "l2_lambda" in entries:
            train_kwargs["l2_lambda"] = float(entries["l2_lambda"])
        if "tolerance" in entries:
            train_kwargs["tolerance"] = float(entries["tolerance"])
        if train_kwargs:
            cfg.train = replace(cfg.train, **train_kwargs)

    if getattr(args, "out", None):
        cfg.out_dir = Path(args.out)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "threshold", None) is not None:
        cfg.selection = replace(cfg.selection, significance_threshold=args.threshold)
    if cfg.annotation_mode not in ("builtin", "ingest"):
        raise ValidationError(
            f"annotation_mode must be builtin or ingest, got {cfg.annotation_mode!r}"
        )
    return cfg


# ---------------------------------------------------------------------------
# Artifact helpers

def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _require_inputs(cfg: PipelineConfig, *keys: str) -> None:
    for key in keys:
        value = getattr(cfg, key)
        if value is None:
            raise ValidationError(f"config value {key!r} is required for this command")
        if not Path(value).exists():
            raise ValidationError(f"{key} path does not exist: {value}")


def _load_corpus(cfg: PipelineConfig) -> Corpus:
    _require_inputs(cfg, "corpus")
    with open(cfg.corpus, encoding="utf-8") as fp:
        return load_corpus(fp)


def _doc_filename(doc_id: str) -> str:
    return urllib.parse.quote(doc_id, safe="._-")


def _annotations_out_dir(cfg: PipelineConfig) -> Path:
    return cfg.out_dir / "annotations"


def _pos_lexicon(cfg: PipelineConfig) -> ann.PosLexicon:
    if cfg.pos_lexicon:
        _require_inputs(cfg, "pos_lexicon")
        with open(cfg.pos_lexicon, encoding="utf-8") as fp:
            return ann.PosLexicon.load(fp).merged_over_default()
    return ann.PosLexicon.default()


def _split_ids(cfg: PipelineConfig, corpus: Corpus) -> tuple[set[str], set[str]]:
    """(train ids, eval ids) under the configured split; no split means all/all."""
    if cfg.test_fraction and 0.0 < cfg.test_fraction < 1.0:
        train, test = stratified_split(corpus, cfg.test_fraction, cfg.seed)
        return {d.id for d in train}, {d.id for d in test}
    everything = {d.id for d in corpus}
    return everything, everything


def _read_annotation(cfg: PipelineConfig, doc_id: str) -> ann.Annotation:
    base = _annotations_out_dir(cfg) / _doc_filename(doc_id)
    tokens_path = base.parent / (base.name + ".tokens")
    trees_path = base.parent / (base.name + ".trees")
    if not tokens_path.exists():
        raise ValidationError(f"annotation file does not exist: {tokens_path}")
    tree_text = trees_path.read_text(encoding="utf-8") if trees_path.exists() else None
    return ann.ingest_annotation(
        tokens_path.read_text(encoding="utf-8"), tree_text, doc_id=doc_id
    )


def _float_cell(x: float) -> str:
    return repr(float(x))


def _write_features_csv(path: Path, rows: list[tuple[str, GradeLevel, FeatureVector]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["doc_id", "grade"] + list(FEATURE_CODES))
    for doc_id, grade, vector in rows:
        writer.writerow(
            [doc_id, grade.label] + [_float_cell(vector.values[c]) for c in FEATURE_CODES]
        )
    _write_atomic(path, buf.getvalue())


def _read_features_csv(path: Path) -> list[tuple[str, GradeLevel, dict[str, float]]]:
    if not path.exists():
        raise ValidationError(f"features file does not exist: {path}")
    rows = []
    with open(path, newline="", encoding="utf-8") as fp:
        reader = csv.reader(fp)
        header = next(reader, None)
        expected = ["doc_id", "grade"] + list(FEATURE_CODES)
        if header != expected:
            raise ValidationError(f"{path}: unexpected feature CSV header")
        for lineno, record in enumerate(reader, start=2):
            if len(record) != 2 + len(FEATURE_CODES):
                raise ValidationError(f"{path}: line {lineno}: wrong column count")
            doc_id, grade_label = record[0], record[1]
            values = {c: float(v) for c, v in zip(FEATURE_CODES, record[2:])}
            rows.append((doc_id, GradeLevel.from_string(grade_label), values))
    return rows


# ---------------------------------------------------------------------------
# Stage commands

def cmd_annotate(cfg: PipelineConfig) -> int:
    corpus = _load_corpus(cfg)
    if cfg.annotation_mode == "ingest":
        _require_inputs(cfg, "annotations_dir")
    out_dir = _annotations_out_dir(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    lexicon = _pos_lexicon(cfg)
    failures = []
    clean_lines = []
    for doc in sorted(corpus, key=lambda d: d.id):
        try:
            if cfg.annotation_mode == "ingest":
                base = cfg.annotations_dir / _doc_filename(doc.id)
                tokens_path = base.parent / (base.name + ".tokens")
                trees_path = base.parent / (base.name + ".trees")
                for path in (tokens_path, trees_path):
                    if not path.exists():
                        raise ValidationError(f"annotation input does not exist: {path}")
                annotation = ann.ingest_annotation(
                    tokens_path.read_text(encoding="utf-8"),
                    trees_path.read_text(encoding="utf-8"),
                    doc_id=doc.id,
                )
            else:
                cleaned, report = clean_document(doc)
                clean_lines.append(report.to_json())
                annotation = ann.annotate_builtin(cleaned.text, lexicon, doc_id=doc.id)
            base = out_dir / _doc_filename(doc.id)
            _write_atomic(base.parent / (base.name + ".tokens"), ann.write_annotation_tokens(annotation))
            _write_atomic(base.parent / (base.name + ".trees"), ann.write_annotation_trees(annotation))
        except ReadgradeError as exc:
            failures.append((doc.id, str(exc)))
    if cfg.annotation_mode == "builtin":
        _write_atomic(cfg.out_dir / "clean_reports.jsonl", "\n".join(clean_lines) + "\n")
    for doc_id, message in failures:
        print(f"annotate: document {doc_id!r} failed: {message}", file=sys.stderr)
    return 1 if failures else 0


def _extract_rows(cfg: PipelineConfig) -> list[tuple[str, GradeLevel, FeatureVector]]:
    corpus = _load_corpus(cfg)
    _require_inputs(cfg, "difficulty_lexicon", "thesaurus")
    with open(cfg.difficulty_lexicon, encoding="utf-8") as fp:
        lexicon = DifficultyLexicon.load(fp)
    with open(cfg.thesaurus, encoding="utf-8") as fp:
        thesaurus = Thesaurus.load(fp)
    rows = []
    for doc in sorted(corpus, key=lambda d: d.id):
        annotation = _read_annotation(cfg, doc.id)
        rows.append((doc.id, doc.grade, extract_all(annotation, lexicon, thesaurus)))
    return rows


def cmd_extract(cfg: PipelineConfig) -> int:
    _write_features_csv(cfg.out_dir / "features.csv", _extract_rows(cfg))
    return 0


def _selection_report_csv(rows: list[sel.CorrelationRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["code", "cor", "significant", "paired", "included"])
    for row in rows:
        writer.writerow(
            [row.code, _float_cell(row.r), str(row.significant).lower(),
             str(row.paired).lower(), str(row.included).lower()]
        )
    return buf.getvalue()


def _train_subset(cfg: PipelineConfig):
    corpus = _load_corpus(cfg)
    train_ids, eval_ids = _split_ids(cfg, corpus)
    feature_rows = _read_features_csv(cfg.out_dir / "features.csv")
    train_rows = [row for row in feature_rows if row[0] in train_ids]
    eval_rows = [row for row in feature_rows if row[0] in eval_ids]
    return train_rows, eval_rows


def cmd_select(cfg: PipelineConfig, args=None) -> int:
    replay_path = getattr(args, "replay", None) if args else None
    if replay_path:
        entries = []
        with open(replay_path, newline="", encoding="utf-8") as fp:
            reader = csv.DictReader(fp)
            for record in reader:
                entries.append(
                    (record["code"], float(record["cor"]), _parse_bool(record["paired"]))
                )
        overrides: dict[str, bool] = {}
        for code in getattr(args, "force_include", None) or []:
            overrides[code] = True
        for code in getattr(args, "force_exclude", None) or []:
            overrides[code] = False
        rows, warnings = sel.replay_selection(entries, cfg.selection, overrides)
        for warning in warnings:
            print(f"select: warning: {warning}", file=sys.stderr)
        selected = [row.code for row in rows if row.included]
    else:
        train_rows, _ = _train_subset(cfg)
        if not train_rows:
            raise ValidationError("no training documents available for selection")
        X = np.asarray([[values[c] for c in FEATURE_CODES] for _, _, values in train_rows])
        grades = [grade for _, grade, _ in train_rows]
        rows, selected = sel.select_features(X, grades, cfg.selection)
    if not selected:
        raise ValidationError("selection produced an empty feature set")
    _write_atomic(cfg.out_dir / "selection.csv", _selection_report_csv(rows))
    _write_atomic(cfg.out_dir / "selected.txt", "\n".join(selected) + "\n")
    return 0


def _read_selected(cfg: PipelineConfig) -> list[str]:
    path = cfg.out_dir / "selected.txt"
    if not path.exists():
        raise ValidationError(f"selected feature list does not exist: {path}")
    return [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def cmd_train(cfg: PipelineConfig) -> int:
    selected = _read_selected(cfg)
    train_rows, _ = _train_subset(cfg)
    if not train_rows:
        raise ValidationError("no training documents available")
    X = np.asarray([[values[c] for c in selected] for _, _, values in train_rows])
    grades = [grade for _, grade, _ in train_rows]
    model = mdl.train(X, grades, selected, cfg.train)
    _write_atomic(cfg.resolved_model_file(), mdl.save_model(model))
    return 0


def cmd_predict(cfg: PipelineConfig) -> int:
    model_path = cfg.resolved_model_file()
    if not model_path.exists():
        raise ValidationError(f"model file does not exist: {model_path}")
    model = mdl.load_model(model_path.read_text(encoding="utf-8"))
    _, eval_rows = _train_subset(cfg)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    prob_headers = [f"p{g.label}" for g in model.classes]
    writer.writerow(["doc_id", "expected_grade", "argmax_grade"] + prob_headers)
    for doc_id, _, values in eval_rows:
        posterior = mdl.predict_posterior(model, values)
        expected = posterior.expected_grade()
        argmax = posterior.argmax_grade()
        writer.writerow(
            [doc_id, _float_cell(expected), argmax.label]
            + [_float_cell(posterior.probs[g]) for g in model.classes]
        )
    _write_atomic(cfg.out_dir / "predictions.csv", buf.getvalue())
    return 0


def cmd_score(cfg: PipelineConfig) -> int:
    corpus = _load_corpus(cfg)
    _require_inputs(cfg, "familiar_words")
    with open(cfg.familiar_words, encoding="utf-8") as fp:
        familiar = bl.FamiliarWordList.load(fp)
    _, eval_ids = _split_ids(cfg, corpus)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["doc_id", "grade", "flesch_kincaid", "dale_chall"])
    for doc in sorted(corpus, key=lambda d: d.id):
        if doc.id not in eval_ids:
            continue
        annotation = _read_annotation(cfg, doc.id)
        stats = bl.stats_from_annotation(annotation, familiar)
        writer.writerow(
            [doc.id, doc.grade.label,
             _float_cell(bl.flesch_kincaid_grade(stats)),
             _float_cell(bl.dale_chall_score(stats))]
        )
    _write_atomic(cfg.out_dir / "baselines.csv", buf.getvalue())
    return 0


def cmd_evaluate(cfg: PipelineConfig, args=None) -> int:
    corpus = _load_corpus(cfg)
    grade_of = {doc.id: doc.grade for doc in corpus}
    predictions_path = cfg.out_dir / "predictions.csv"
    if not predictions_path.exists():
        raise ValidationError(f"predictions file does not exist: {predictions_path}")
    model_preds = []
    with open(predictions_path, newline="", encoding="utf-8") as fp:
        reader = csv.DictReader(fp)
        for record in reader:
            doc_id = record["doc_id"]
            if doc_id not in grade_of:
                raise ValidationError(f"prediction for unknown document {doc_id!r}")
            model_preds.append((grade_of[doc_id], float(record["expected_grade"])))
    tables = [("model", ev.EvalTable.from_predictions(model_preds))]

    baselines_path = cfg.out_dir / "baselines.csv"
    if baselines_path.exists():
        fk_preds, dc_preds = [], []
        with open(baselines_path, newline="", encoding="utf-8") as fp:
            reader = csv.DictReader(fp)
            for record in reader:
                if record["doc_id"] not in grade_of:
                    raise ValidationError(f"baseline score for unknown document {record['doc_id']!r}")
                grade = grade_of[record["doc_id"]]
                fk_preds.append((grade, float(record["flesch_kincaid"])))
                dc_preds.append((grade, float(record["dale_chall"])))
        tables.append(("F-K", ev.EvalTable.from_predictions(fk_preds)))
        tables.append(("D-C", ev.EvalTable.from_predictions(dc_preds)))

    fmt = getattr(args, "format", None) or "table"
    text_report = ev.render_report(tables, fmt="table")
    csv_report = ev.render_report(tables, fmt="csv")
    _write_atomic(cfg.out_dir / "evaluation.txt", text_report)
    _write_atomic(cfg.out_dir / "evaluation.csv", csv_report)
    print(csv_report if fmt == "csv" else text_report, end="")
    if getattr(args, "require_monotone", False) and not tables[0][1].monotone:
        print("evaluate: model means are not strictly monotone", file=sys.stderr)
        return 1
    return 0


def cmd_pipeline(cfg: PipelineConfig, args=None) -> int:
    for stage_name, stage in (
        ("annotate", cmd_annotate),
        ("extract", cmd_extract),
        ("select", cmd_select),
        ("train", cmd_train),
        ("predict", cmd_predict),
        ("score", cmd_score),
    ):
        code = stage(cfg)
        if code != 0:
            print(f"pipeline: stage {stage_name} failed", file=sys.stderr)
            return code
    return cmd_evaluate(cfg, args)


def cmd_synth(cfg: PipelineConfig, args) -> int:
    docs_per_grade = getattr(args, "docs_per_grade", 100)
    artifacts = synth_generate(cfg.seed, docs_per_grade)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)

    buf = io.StringIO()
    dump_corpus(artifacts.corpus, buf)
    _write_atomic(out / "corpus.jsonl", buf.getvalue())
    _write_atomic(
        out / "difficulty_lexicon.tsv",
        "".join(f"{w}\t{lvl}\n" for w, lvl in sorted(artifacts.difficulty_entries.items())),
    )
    _write_atomic(
        out / "thesaurus.tsv",
        "".join(f"{gid}\t{','.join(words)}\n" for gid, words in artifacts.thesaurus_groups),
    )
    _write_atomic(out / "familiar_words.txt", "".join(f"{w}\n" for w in artifacts.familiar_words))
    _write_atomic(
        out / "pos_lexicon.tsv",
        "".join(f"{w}\t{tag}\n" for w, tag in sorted(artifacts.pos_entries.items())),
    )
    config_text = "\n".join(
        [
            "corpus = corpus.jsonl",
            "difficulty_lexicon = difficulty_lexicon.tsv",
            "thesaurus = thesaurus.tsv",
            "familiar_words = familiar_words.txt",
            "pos_lexicon = pos_lexicon.tsv",
            "out_dir = .",
            "annotation_mode = builtin",
            f"seed = {cfg.seed}",
            "test_fraction = 0.2",
        ]
    )
    _write_atomic(out / "synth.cfg", config_text + "\n")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a key = value config file")
    common.add_argument("--seed", type=int, help="seed for splits and generation")
    common.add_argument("--out", help="output directory for artifacts")
    common.add_argument("--threshold", type=float, help="significance threshold for selection")
    common.add_argument("--require-monotone", action="store_true",
                        help="exit nonzero when model means are not strictly increasing")
    common.add_argument("--format", choices=("csv", "table"), help="report format")

    parser = argparse.ArgumentParser(
        prog="readgrade",
        description="Curriculum-graded text readability assessment pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("annotate", parents=[common], help="write annotation interchange files")
    sub.add_parser("extract", parents=[common], help="compute the 35-feature CSV")
    p_select = sub.add_parser("select", parents=[common], help="rank and prune features")
    p_select.add_argument("--replay", help="CSV of declared code,cor,paired rows to replay")
    p_select.add_argument("--force-include", action="append", metavar="CODE",
                          help="override: force a code into the selection (replay mode)")
    p_select.add_argument("--force-exclude", action="append", metavar="CODE",
                          help="override: force a code out of the selection (replay mode)")
    sub.add_parser("train", parents=[common], help="fit the grade classifier")
    sub.add_parser("predict", parents=[common], help="write per-document grade predictions")
    sub.add_parser("score", parents=[common], help="write readability-formula baselines")
    sub.add_parser("evaluate", parents=[common], help="build the per-grade report")
    sub.add_parser("pipeline", parents=[common], help="run all stages end to end")
    p_synth = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    p_synth.add_argument("--docs-per-grade", type=int, default=100)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "annotate":
            return cmd_annotate(cfg)
        if args.command == "extract":
            return cmd_extract(cfg)
        if args.command == "select":
            return cmd_select(cfg, args)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "predict":
            return cmd_predict(cfg)
        if args.command == "score":
            return cmd_score(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args)
        if args.command == "pipeline":
            return cmd_pipeline(cfg, args)
        if args.command == "synth":
            return cmd_synth(cfg, args)
        raise ValidationError(f"unknown command {args.command!r}")
    except ReadgradeError as exc:
        print(f"readgrade {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - report and map to exit code 2
        print(f"readgrade {args.command}: internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
