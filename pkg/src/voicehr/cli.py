"""Batch command-line interface.

Verbs: synth, extract, fit, classify, report, predict. Exit codes:
0 success, 2 validation error, 3 data error, 4 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import classify as classify_mod
from . import pipeline, synth
from .classify import SplitSpec
from .errors import ConvergenceFailureError, SpecInvalidError, VoicehrError
from .extract import (
    embeddings_csv_path,
    extract_observations,
    read_embeddings_csv,
    read_features_csv,
    write_embeddings_csv,
    write_features_csv,
)
from .pipeline import PipelineConfig
from .regression import fit_ols, load_model, predict, save_model
from .signal_io import load_manifest

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4


def _load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return PipelineConfig.from_json(path)


def cmd_synth(args) -> int:
    spec = synth.SynthSpec.from_json(args.spec) if args.spec else synth.SynthSpec()
    if args.seed is not None:
        spec = synth.SynthSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    manifest_path, ledger = synth.generate_synthetic_corpus(spec, args.out)
    print(f"wrote {len(ledger)} takes; manifest at {manifest_path}")
    return EXIT_OK


def cmd_extract(args) -> int:
    config = _load_config(args.config)
    manifest = load_manifest(args.manifest)
    sink = None
    if args.cepstra_dir:
        cepstra_dir = Path(args.cepstra_dir)
        cepstra_dir.mkdir(parents=True, exist_ok=True)

        def sink(entry, cepstra):
            name = f"{entry.subject_id}_{entry.emotion.value}_{entry.take_index:03d}.csv"
            np.savetxt(cepstra_dir / name, cepstra.frames, delimiter=",")

    observations, vectors_by_subject = extract_observations(
        manifest, config.feature, config.peak, cepstra_sink=sink)
    write_features_csv(observations, args.out)
    write_embeddings_csv(vectors_by_subject, embeddings_csv_path(args.out),
                         config.feature.n_cepstra)
    print(f"wrote {len(observations)} observations to {args.out}")
    return EXIT_OK


def cmd_fit(args) -> int:
    config = _load_config(args.config)
    observations = read_features_csv(args.features)
    kept, rejected = pipeline.filter_observations(observations, config.filter_window)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple, list] = {}
    for obs in kept:
        if args.mode == "separate":
            key = (obs.subject_id, obs.emotion.value)
        else:
            key = (obs.subject_id, "combined")
        groups.setdefault(key, []).append(obs)
    n = 0
    for (subject_id, tag), rows in sorted(groups.items()):
        model = fit_ols([(o.feature_distance, o.heart_rate_bpm) for o in rows],
                        subject_id=subject_id, emotion=tag)
        save_model(model, outdir / f"{subject_id}_{tag}.json")
        n += 1
    print(f"fitted {n} models ({len(rejected)} rows filtered out)")
    return EXIT_OK


def cmd_classify(args) -> int:
    emb_path = embeddings_csv_path(args.features)
    if emb_path.is_file():
        vectors_by_subject = read_embeddings_csv(emb_path)
    else:
        # scalar-only fallback: classify on the feature distance alone
        observations = read_features_csv(args.features)
        vectors_by_subject = {}
        for o in observations:
            vectors_by_subject.setdefault(o.subject_id, []).append(
                classify_mod.LabeledVector(
                    features=np.asarray([o.feature_distance]),
                    label=o.emotion, subject_id=o.subject_id))
    config = PipelineConfig(split=SplitSpec(train_fraction=args.split, seed=args.seed))
    matrix, subjects = pipeline.classifier_matrix(
        vectors_by_subject, config, algorithms=(args.algo,))
    writer = csv.writer(sys.stdout if args.out is None
                        else open(args.out, "w", encoding="utf-8", newline=""),
                        lineterminator="\n")
    writer.writerow(["classifier"] + subjects)
    writer.writerow([args.algo] + [pipeline.round2(matrix[args.algo][s]) for s in subjects])
    return EXIT_OK


def cmd_report(args) -> int:
    config = _load_config(args.config)
    observations = read_features_csv(args.features)
    emb_path = embeddings_csv_path(args.features)
    if not emb_path.is_file():
        print(f"error: embeddings file {emb_path} not found "
              "(run extract first)", file=sys.stderr)
        return EXIT_DATA
    vectors_by_subject = read_embeddings_csv(emb_path)
    report = pipeline.build_report(observations, vectors_by_subject, config)
    written = pipeline.render_report(report, args.out)
    if args.models:
        models = sorted(Path(args.models).glob("*.json"))
        summary_path = Path(args.out) / "summary.json"
        with open(summary_path, "r", encoding="utf-8") as fh:
            summary = json.load(fh)
        summary["models"] = [load_model(p).to_dict() for p in models]
        with open(summary_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    for path in written:
        print(path)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    print(f"{predict(model, args.fd):g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voicehr",
        description="Estimate heart rate from speech feature distances.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--spec", help="SynthSpec JSON file (defaults used when omitted)")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="manifest -> feature/heart-rate observations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--out", required=True, help="output features CSV")
    p.add_argument("--cepstra-dir", help="also dump per-utterance cepstra CSVs here")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("fit", help="fit per-cell linear models into a model store")
    p.add_argument("--features", required=True)
    p.add_argument("--mode", choices=["separate", "combined"], default="separate")
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--out", required=True, help="model store directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("classify", help="per-subject classifier accuracy matrix")
    p.add_argument("--features", required=True)
    p.add_argument("--algo", choices=list(pipeline.ALGORITHMS), default="cvr")
    p.add_argument("--split", type=float, default=0.66)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", help="render the four evaluation tables + summary")
    p.add_argument("--features", required=True)
    p.add_argument("--models", help="model store directory to echo into the summary")
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("predict", help="predict bpm from one feature distance")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--fd", type=float, required=True)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (SpecInvalidError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (VoicehrError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
