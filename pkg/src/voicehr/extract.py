"""Manifest-to-observations extraction.

Walks a dataset manifest, computes per-utterance embeddings and feature
distances against each subject's neutral enrollment reference, extracts
heart rates from the paired ECG records, and emits Observation rows plus
the classification feature vectors.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .classify import LabeledVector
from .ecg_hr import PeakConfig, extract_heart_rate
from .regression import Observation
from .signal_io import DatasetManifest, EmotionLabel, load_audio, load_ecg
from .speech_features import (
    FeatureConfig,
    feature_distance,
    mfcc,
    subject_reference,
    utterance_embedding,
)

FEATURES_HEADER = ["subject_id", "emotion", "take_index",
                   "feature_distance", "heart_rate_bpm"]


def extract_observations(manifest: DatasetManifest,
                         feature_config: FeatureConfig = FeatureConfig(),
                         peak_config: PeakConfig = PeakConfig(),
                         cepstra_sink=None):
    """Compute (observations, vectors_by_subject) for a whole manifest.

    The reference embedding per subject is the mean over its neutral
    takes (all of them; the evaluation holdout happens downstream), or
    over every take when a subject has no neutral recordings.
    `cepstra_sink(entry, cepstra)` is called per utterance when given.
    """
    embeddings = {}
    for entry in manifest.entries:
        clip = load_audio(entry.audio_path)
        cepstra = mfcc(clip, feature_config)
        if cepstra_sink is not None:
            cepstra_sink(entry, cepstra)
        embeddings[(entry.subject_id, entry.emotion, entry.take_index)] = (
            utterance_embedding(cepstra))

    references = {}
    for subject_id in manifest.subjects():
        neutral = [emb for (sid, emo, _), emb in embeddings.items()
                   if sid == subject_id and emo == EmotionLabel.NEUTRAL]
        if not neutral:
            neutral = [emb for (sid, _, _), emb in embeddings.items()
                       if sid == subject_id]
        references[subject_id] = subject_reference(neutral)

    observations = []
    vectors_by_subject: dict[str, list[LabeledVector]] = {}
    for entry in manifest.entries:
        emb = embeddings[(entry.subject_id, entry.emotion, entry.take_index)]
        fd = feature_distance(emb, references[entry.subject_id],
                              reference_id=entry.subject_id)
        hr = extract_heart_rate(load_ecg(entry.ecg_path), peak_config)
        observations.append(Observation(
            subject_id=entry.subject_id, emotion=entry.emotion,
            feature_distance=fd.value, heart_rate_bpm=hr.bpm,
            take_index=entry.take_index))
        vectors_by_subject.setdefault(entry.subject_id, []).append(LabeledVector(
            features=np.append(emb.mean_cepstra, fd.value),
            label=entry.emotion, subject_id=entry.subject_id))
    return observations, vectors_by_subject


def write_features_csv(observations, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FEATURES_HEADER)
        for o in observations:
            w.writerow([o.subject_id, o.emotion.value, o.take_index,
                        repr(o.feature_distance), repr(o.heart_rate_bpm)])


def read_features_csv(path) -> list[Observation]:
    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(Observation(
                subject_id=row["subject_id"],
                emotion=EmotionLabel.parse(row["emotion"]),
                take_index=int(row["take_index"]),
                feature_distance=float(row["feature_distance"]),
                heart_rate_bpm=float(row["heart_rate_bpm"])))
    return out


def embeddings_csv_path(features_path) -> Path:
    """Sibling file carrying the embedding vectors next to features CSV."""
    p = Path(features_path)
    return p.with_name(p.stem + "_embeddings.csv")


def write_embeddings_csv(vectors_by_subject, path, n_cepstra: int) -> None:
    header = ["subject_id", "emotion"] + [f"c{i}" for i in range(n_cepstra)] + ["fd"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for subject_id in sorted(vectors_by_subject):
            for vec in vectors_by_subject[subject_id]:
                w.writerow([subject_id, vec.label.value]
                           + [repr(float(v)) for v in vec.features])


def read_embeddings_csv(path) -> dict[str, list[LabeledVector]]:
    vectors_by_subject: dict[str, list[LabeledVector]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for row in reader:
            features = np.asarray([float(v) for v in row[2:]])
            vectors_by_subject.setdefault(row[0], []).append(LabeledVector(
                features=features, label=EmotionLabel.parse(row[1]),
                subject_id=row[0]))
    return vectors_by_subject
