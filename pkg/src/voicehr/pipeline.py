"""End-to-end experiment orchestration and report rendering.

Filters observations, runs the separate-emotion and combined-emotion
regression experiments, sweeps the classifiers, combines prediction and
classification accuracy into the general-model score, and renders the
four report tables as CSV plus a full-precision JSON summary.
"""

from __future__ import annotations

import csv
import json
import math
import zlib
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from . import classify
from .classify import LabeledVector, SplitSpec, TreeConfig
from .ecg_hr import PeakConfig
from .errors import (
    CellTooSmallError,
    OutOfRangeError,
    SubjectMismatchError,
    SubjectTooSmallError,
)
from .regression import (
    LinearModel,
    Observation,
    fit_ols,
    predict,
    relative_error,
)
from .signal_io import EMOTION_ORDER, EmotionLabel
from .speech_features import FeatureConfig

ALGORITHMS = ("cvr", "gnb", "knn")

# Reference model echoed by the report renderer; its coefficients come
# from the published study this pipeline benchmarks against.
BENCHMARK_MODEL = LinearModel(
    beta0_hat=97.031, beta1_hat=0.091, n=0, s_xx=0.0, s_xy=0.0,
    residual_std=0.0, subject_id="s01", emotion="joy")


@dataclass(frozen=True)
class FilterWindow:
    hr_min_bpm: float = 30.0
    hr_max_bpm: float = 220.0


@dataclass(frozen=True)
class HoldoutSpec:
    test_fraction: float = 0.2
    seed: int = 0
    in_sample: bool = False


@dataclass(frozen=True)
class PipelineConfig:
    feature: FeatureConfig = field(default_factory=FeatureConfig)
    peak: PeakConfig = field(default_factory=PeakConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    tree: TreeConfig = field(default_factory=TreeConfig)
    filter_window: FilterWindow = field(default_factory=FilterWindow)
    holdout: HoldoutSpec = field(default_factory=HoldoutSpec)
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        seed = int(d.get("seed", 0))
        holdout = d.get("holdout", {})
        holdout.setdefault("seed", seed)
        split = d.get("split", {})
        split.setdefault("seed", seed)
        return cls(
            feature=FeatureConfig(**d.get("feature", {})),
            peak=PeakConfig(**d.get("peak", {})),
            split=SplitSpec(**split),
            tree=TreeConfig(**d.get("tree", {})),
            filter_window=FilterWindow(**d.get("filter_window", {})),
            holdout=HoldoutSpec(**holdout),
            seed=seed,
        )

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def filter_observations(rows, window: FilterWindow = FilterWindow()):
    """Split observations into kept rows and (row, reason) rejections."""
    kept, rejected = [], []
    for obs in rows:
        if not (math.isfinite(obs.feature_distance) and math.isfinite(obs.heart_rate_bpm)):
            rejected.append((obs, "non_finite"))
        elif not window.hr_min_bpm <= obs.heart_rate_bpm <= window.hr_max_bpm:
            rejected.append((obs, "hr_out_of_range"))
        elif obs.feature_distance < 0:
            rejected.append((obs, "negative_fd"))
        else:
            kept.append(obs)
    return kept, rejected


@dataclass(frozen=True)
class CellScore:
    subject_id: str
    emotion: str  # emotion value or "combined"
    relative_error_pct: float
    n_train: int
    n_test: int

    @property
    def accuracy_pct(self) -> float:
        return 100.0 - self.relative_error_pct


def _holdout_split(observations, holdout: HoldoutSpec, salt: str):
    """Seeded train/test cut of one cell; salt decorrelates cells."""
    n = len(observations)
    if holdout.in_sample:
        return list(observations), list(observations)
    rng = np.random.default_rng([holdout.seed, zlib.crc32(salt.encode())])
    perm = rng.permutation(n)
    n_test = max(1, int(round(holdout.test_fraction * n)))
    n_test = min(n_test, n - 2)  # keep at least 2 training points
    test_idx = set(perm[:n_test].tolist())
    train = [observations[i] for i in range(n) if i not in test_idx]
    test = [observations[i] for i in sorted(test_idx)]
    return train, test


def _score_cell(observations, holdout: HoldoutSpec, subject_id: str, tag: str):
    if len(observations) < 4:
        raise CellTooSmallError(f"{subject_id}/{tag}: {len(observations)} observations")
    train, test = _holdout_split(observations, holdout, f"{subject_id}/{tag}")
    model = fit_ols(
        [(o.feature_distance, o.heart_rate_bpm) for o in train],
        subject_id=subject_id, emotion=tag)
    errors = [relative_error(predict(model, o.feature_distance), o.heart_rate_bpm)
              for o in test]
    score = CellScore(subject_id=subject_id, emotion=tag,
                      relative_error_pct=float(np.mean(errors)),
                      n_train=len(train), n_test=len(test))
    return model, score


def _group_by_subject(observations):
    groups: dict[str, list] = {}
    for obs in observations:
        groups.setdefault(obs.subject_id, []).append(obs)
    return dict(sorted(groups.items()))


def run_experiment_separate(observations, config: PipelineConfig):
    """Per-(subject, emotion) regression scores; unfittable cells are listed.

    Returns (scores, models, skipped) where skipped holds
    (subject, emotion, reason) triples.
    """
    scores, models, skipped = [], [], []
    for subject_id, group in _group_by_subject(observations).items():
        for emotion in EMOTION_ORDER:
            cell = [o for o in group if o.emotion == emotion]
            try:
                model, score = _score_cell(cell, config.holdout, subject_id, emotion.value)
            except CellTooSmallError as exc:
                skipped.append((subject_id, emotion.value, str(exc)))
                continue
            models.append(model)
            scores.append(score)
    return scores, models, skipped


def run_experiment_combined(observations, config: PipelineConfig):
    """Per-subject regression scores with all three emotions pooled."""
    scores, models, skipped = [], [], []
    for subject_id, group in _group_by_subject(observations).items():
        try:
            model, score = _score_cell(group, config.holdout, subject_id, "combined")
        except CellTooSmallError as exc:
            skipped.append((subject_id, "combined", str(exc)))
            continue
        models.append(model)
        scores.append(score)
    if not scores and skipped:
        raise SubjectTooSmallError("no subject had enough pooled observations")
    return scores, models, skipped


@dataclass(frozen=True)
class ComparisonRow:
    subject_id: str
    combined_error_pct: float
    average_error_pct: float
    joy_error_pct: float
    neutral_error_pct: float
    anger_error_pct: float
    separate_better: bool


def compare_experiments(separate_scores, combined_scores) -> list[ComparisonRow]:
    """Per-subject combined vs separate errors, flagging separate-better."""
    sep_by_subject: dict[str, dict[str, float]] = {}
    for s in separate_scores:
        sep_by_subject.setdefault(s.subject_id, {})[s.emotion] = s.relative_error_pct
    comb_by_subject = {s.subject_id: s.relative_error_pct for s in combined_scores}
    complete = {sid for sid, cells in sep_by_subject.items()
                if len(cells) == len(EMOTION_ORDER)}
    if complete != set(comb_by_subject):
        raise SubjectMismatchError(
            f"separate covers {sorted(complete)}, combined covers {sorted(comb_by_subject)}")
    rows = []
    for sid in sorted(complete):
        cells = sep_by_subject[sid]
        average = float(np.mean([cells[e.value] for e in EMOTION_ORDER]))
        rows.append(ComparisonRow(
            subject_id=sid,
            combined_error_pct=comb_by_subject[sid],
            average_error_pct=average,
            joy_error_pct=cells["joy"],
            neutral_error_pct=cells["neutral"],
            anger_error_pct=cells["anger"],
            separate_better=average < comb_by_subject[sid],
        ))
    return rows


def general_model_score(prediction_accuracy_pct: float,
                        classification_accuracy_pct: float) -> float:
    """Pipeline-level score: product of the two accuracies as a percent."""
    for v in (prediction_accuracy_pct, classification_accuracy_pct):
        if not 0.0 <= v <= 100.0:
            raise OutOfRangeError(f"accuracy {v} outside [0, 100]")
    return prediction_accuracy_pct * classification_accuracy_pct / 100.0


def _train_algo(algo: str, train, tree_config: TreeConfig):
    if algo == "cvr":
        return classify.train_cvr(train, tree_config)
    if algo == "gnb":
        return classify.train_gnb(train)
    if algo == "knn":
        return classify.train_knn(train)
    raise ValueError(f"unknown algorithm {algo!r}")


def classifier_matrix(vectors_by_subject: dict[str, list[LabeledVector]],
                      config: PipelineConfig, algorithms=ALGORITHMS):
    """Per-subject accuracy of each algorithm under the stratified split.

    Returns (matrix, subjects) with matrix[algo][subject] in percent.
    """
    subjects = sorted(vectors_by_subject)
    matrix: dict[str, dict[str, float]] = {a: {} for a in algorithms}
    for sid in subjects:
        train, test = classify.split(vectors_by_subject[sid], config.split)
        for algo in algorithms:
            model = _train_algo(algo, train, config.tree)
            matrix[algo][sid] = classify.classification_accuracy(model, test)
    return matrix, subjects


@dataclass
class EvaluationReport:
    table_separate: list          # CellScore
    table_combined_vs_separate: list  # ComparisonRow
    classifier_matrix: dict       # algo -> subject -> accuracy pct
    classifier_averages: dict     # algo -> mean accuracy pct
    general_model_pct: float
    benchmark_model: LinearModel = field(default_factory=lambda: BENCHMARK_MODEL)

    def to_dict(self) -> dict:
        return {
            "table_separate": [
                {"subject_id": s.subject_id, "emotion": s.emotion,
                 "relative_error_pct": s.relative_error_pct,
                 "n_train": s.n_train, "n_test": s.n_test}
                for s in self.table_separate],
            "table_combined_vs_separate": [
                {"subject_id": r.subject_id,
                 "combined_error_pct": r.combined_error_pct,
                 "average_error_pct": r.average_error_pct,
                 "joy_error_pct": r.joy_error_pct,
                 "neutral_error_pct": r.neutral_error_pct,
                 "anger_error_pct": r.anger_error_pct,
                 "separate_better": r.separate_better}
                for r in self.table_combined_vs_separate],
            "classifier_matrix": self.classifier_matrix,
            "classifier_averages": self.classifier_averages,
            "general_model_pct": self.general_model_pct,
            "benchmark_model": self.benchmark_model.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        return cls(
            table_separate=[
                CellScore(subject_id=s["subject_id"], emotion=s["emotion"],
                          relative_error_pct=s["relative_error_pct"],
                          n_train=s["n_train"], n_test=s["n_test"])
                for s in d["table_separate"]],
            table_combined_vs_separate=[
                ComparisonRow(subject_id=r["subject_id"],
                              combined_error_pct=r["combined_error_pct"],
                              average_error_pct=r["average_error_pct"],
                              joy_error_pct=r["joy_error_pct"],
                              neutral_error_pct=r["neutral_error_pct"],
                              anger_error_pct=r["anger_error_pct"],
                              separate_better=r["separate_better"])
                for r in d["table_combined_vs_separate"]],
            classifier_matrix=d["classifier_matrix"],
            classifier_averages=d["classifier_averages"],
            general_model_pct=d["general_model_pct"],
            benchmark_model=LinearModel.from_dict(d["benchmark_model"]),
        )


def build_report(observations, vectors_by_subject, config: PipelineConfig) -> EvaluationReport:
    """Run both regression experiments and the classifier sweep."""
    kept, _ = filter_observations(observations, config.filter_window)
    sep_scores, _, _ = run_experiment_separate(kept, config)
    comb_scores, _, _ = run_experiment_combined(kept, config)
    comparison = compare_experiments(sep_scores, comb_scores)
    matrix, _ = classifier_matrix(vectors_by_subject, config)
    averages = {a: float(np.mean(list(per_subj.values())))
                for a, per_subj in matrix.items()}
    prediction_accuracy = float(np.mean([s.accuracy_pct for s in sep_scores]))
    best_classification = max(averages.values())
    return EvaluationReport(
        table_separate=sep_scores,
        table_combined_vs_separate=comparison,
        classifier_matrix=matrix,
        classifier_averages=averages,
        general_model_pct=general_model_score(prediction_accuracy, best_classification),
    )


def round2(value: float) -> str:
    """Half-up rounding to 2 decimals, e.g. 97.356 -> '97.36'."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def render_report(report: EvaluationReport, outdir) -> list[Path]:
    """Write table1..table4 CSVs (2-decimal) and a full-precision summary."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    # Table 1: per-subject separate-emotion errors and accuracies.
    by_subject: dict[str, dict[str, float]] = {}
    for s in report.table_separate:
        by_subject.setdefault(s.subject_id, {})[s.emotion] = s.relative_error_pct
    path = outdir / "table1_separate.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject", "joy_err", "neutral_err", "anger_err",
                    "joy_acc", "neutral_acc", "anger_acc"])
        for sid in sorted(by_subject):
            errs = [by_subject[sid].get(e.value, float("nan")) for e in EMOTION_ORDER]
            w.writerow([sid] + [round2(v) for v in errs]
                       + [round2(100.0 - v) for v in errs])
    written.append(path)

    # Table 2: combined vs average-of-separate errors.
    path = outdir / "table2_combined.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject", "combined", "average", "joy", "neutral", "anger"])
        for r in report.table_combined_vs_separate:
            w.writerow([r.subject_id, round2(r.combined_error_pct),
                        round2(r.average_error_pct), round2(r.joy_error_pct),
                        round2(r.neutral_error_pct), round2(r.anger_error_pct)])
    written.append(path)

    # Table 3: per-subject classifier accuracies with footer rows.
    subjects = sorted({sid for per in report.classifier_matrix.values() for sid in per})
    path = outdir / "table3_classifiers.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["classifier"] + subjects)
        for algo in report.classifier_matrix:
            per = report.classifier_matrix[algo]
            w.writerow([algo] + [round2(per[sid]) for sid in subjects])
        col_max = {sid: max(report.classifier_matrix[a][sid]
                            for a in report.classifier_matrix) for sid in subjects}
        w.writerow(["max_accuracy"] + [round2(col_max[sid]) for sid in subjects])
        w.writerow(["min_error"] + [round2(100.0 - col_max[sid]) for sid in subjects])
    written.append(path)

    # Table 4: average classifier accuracy.
    path = outdir / "table4_averages.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["classifier", "average_accuracy"])
        for algo, avg in report.classifier_averages.items():
            w.writerow([algo, round2(avg)])
    written.append(path)

    path = outdir / "summary.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)
    return written


def load_report(path) -> EvaluationReport:
    with open(Path(path), "r", encoding="utf-8") as fh:
        return EvaluationReport.from_dict(json.load(fh))
