"""Command-line pipeline: signature, train, predict, eval, synth.

Exit codes: 0 success, 1 input error (bad files, bad flags, degenerate
inputs), 2 internal error.  Every command is deterministic given its inputs,
flags, and seed, and echoes the resolved configuration into its outputs.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import forest, pipeline, synth
from .errors import CurveSigError, ManifestError
from .frenet import write_signature_crv, write_signature_csv

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2


def _config_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("pipeline configuration")
    g.add_argument("--resize", type=int, default=64, metavar="D",
                   help="square side for frame resizing; 0 keeps native size (default 64)")
    g.add_argument("--background", choices=pipeline.BACKGROUND_MODES, default="none",
                   help="background subtraction: none, or per-clip median (default none)")
    g.add_argument("--background-threshold", type=float, default=0.1, metavar="T",
                   help="keep pixels deviating more than T from the background (default 0.1)")
    g.add_argument("--binarize", action="store_true",
                   help="emit binary silhouettes instead of masked grayscale")
    g.add_argument("--grid-size", type=int, default=128, metavar="N",
                   help="uniform arclength grid size (default 128)")
    g.add_argument("--smooth-sigma", type=float, default=0.0, metavar="S",
                   help="Gaussian pre-smoothing along the grid, in samples (default off)")
    g.add_argument("--channels", dest="channel_mode", choices=sorted(pipeline.CHANNEL_MODES),
                   default="k1k2", help="curvature channels to featurize (default k1k2)")
    g.add_argument("--trim-boundary", action="store_true",
                   help="drop the first/last 2 grid samples from feature statistics")
    g.add_argument("--trees", type=int, default=100, metavar="N",
                   help="number of trees in the forest (default 100)")
    g.add_argument("--m-features", type=int, default=0, metavar="M",
                   help="features tried per split; 0 = round(sqrt(F)) (default 0)")
    g.add_argument("--min-leaf", type=int, default=1, metavar="N",
                   help="minimum samples required to keep splitting (default 1)")
    g.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    g.add_argument("--jobs", type=int, default=1,
                   help="parallel workers for per-video processing (default 1)")


def _config_from_args(args) -> pipeline.PipelineConfig:
    return pipeline.PipelineConfig(
        resize=None if args.resize == 0 else args.resize,
        background=args.background,
        background_threshold=args.background_threshold,
        binarize=args.binarize,
        grid_size=args.grid_size,
        smooth_sigma=args.smooth_sigma,
        channel_mode=args.channel_mode,
        trim_boundary=args.trim_boundary,
        n_trees=args.trees,
        m_features=None if args.m_features == 0 else args.m_features,
        min_leaf=args.min_leaf,
        seed=args.seed,
        jobs=args.jobs,
    )


def _model_config(model: forest.ForestModel) -> pipeline.PipelineConfig:
    stored = model.meta.get("config")
    if stored is None:
        return pipeline.PipelineConfig()
    return pipeline.PipelineConfig.from_dict(stored)


def _confusion_report(metrics, class_names) -> dict:
    recall = metrics["per_class_recall"]
    return {
        "accuracy": metrics["accuracy"],
        "per_class_recall": {
            name: (None if np.isnan(r) else float(r)) for name, r in zip(class_names, recall)
        },
        "confusion": metrics["confusion"].tolist(),
        "classes": list(class_names),
    }


def _emit_report(report: dict, path) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_signature(args) -> int:
    config = _config_from_args(args)
    sig = pipeline.signature_for_video(args.video, config)
    write_signature_csv(sig, args.out, config_echo=config.to_json())
    if args.crv_out:
        write_signature_crv(sig, args.crv_out)
    return EXIT_OK


def cmd_train(args) -> int:
    config = _config_from_args(args)
    manifest = pipeline.read_manifest(args.manifest)
    if len(manifest.class_names) < 2:
        raise ManifestError("training needs at least 2 classes in the manifest")
    dataset, failures = pipeline.manifest_dataset(manifest, config)
    for _, msg in failures:
        print(f"warning: {msg}", file=sys.stderr)

    model = forest.train(
        dataset,
        n_trees=config.n_trees,
        m_features=config.m_features,
        seed=config.seed,
        min_leaf=config.min_leaf,
        meta={"config": config.to_dict()},
    )
    forest.save_model(model, args.model_out)

    counts = np.bincount(dataset.labels, minlength=dataset.num_classes)
    report = {
        "config": config.to_dict(),
        "model": str(args.model_out),
        "classes": list(dataset.class_names),
        "per_class_counts": {n: int(c) for n, c in zip(dataset.class_names, counts)},
        "videos_used": dataset.num_rows,
        "videos_failed": len(failures),
        "train_accuracy": forest.evaluate(model, dataset)["accuracy"],
    }
    if args.cv_folds:
        cv = forest.cross_validate(
            dataset, args.cv_folds,
            n_trees=config.n_trees, m_features=config.m_features,
            seed=config.seed, min_leaf=config.min_leaf,
        )
        report["cv"] = {
            "folds": args.cv_folds,
            "mean_accuracy": cv["mean_accuracy"],
            "std_accuracy": cv["std_accuracy"],
            "fold_accuracies": cv["fold_accuracies"].tolist(),
        }
    _emit_report(report, args.report)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = forest.load_model(args.model)
    config = _model_config(model)
    writer = csv.writer(sys.stdout)
    header = ["video_path", "label"]
    if args.votes:
        header += [f"vote_{name}" for name in model.class_names]
    writer.writerow(header)

    failed = 0
    for video in args.videos:
        try:
            sig = pipeline.signature_for_video(video, config)
            from .features import extract_features

            row = extract_features(sig, config.channels, config.trim_boundary).values
            label_id, votes = forest.predict(model, row)
            out = [video, model.class_names[label_id]]
            if args.votes:
                out += [repr(float(v)) for v in votes]
            writer.writerow(out)
        except (CurveSigError, ValueError, OSError) as exc:
            failed += 1
            print(f"error: {video}: {exc}", file=sys.stderr)
    return EXIT_INPUT if failed else EXIT_OK


def cmd_eval(args) -> int:
    model = forest.load_model(args.model)
    config = _model_config(model)
    manifest = pipeline.read_manifest(args.manifest)
    unknown = set(manifest.class_names) - set(model.class_names)
    if unknown and not args.folds:
        raise ManifestError(f"manifest labels not known to the model: {sorted(unknown)}")

    if args.folds:
        dataset, failures = pipeline.manifest_dataset(manifest, config)
        cv = forest.cross_validate(
            dataset, args.folds,
            n_trees=config.n_trees, m_features=config.m_features,
            seed=config.seed, min_leaf=config.min_leaf,
        )
        report = {
            "config": config.to_dict(),
            "mode": f"{args.folds}-fold cross-validation (retrained)",
            "classes": list(dataset.class_names),
            "videos_used": dataset.num_rows,
            "videos_failed": len(failures),
            "mean_accuracy": cv["mean_accuracy"],
            "std_accuracy": cv["std_accuracy"],
            "fold_accuracies": cv["fold_accuracies"].tolist(),
        }
    else:
        matrix, _, _, failures = pipeline.manifest_features(manifest, config)
        pipeline.enforce_failure_budget(failures, len(manifest.entries))
        kept = [e for e in manifest.entries if e not in {f[0] for f in failures}]
        name_to_id = {n: i for i, n in enumerate(model.class_names)}
        labels = np.array([name_to_id[e.label] for e in kept], dtype=int)
        dataset = forest.Dataset(
            features=matrix, labels=labels, class_names=model.class_names
        )
        metrics = forest.evaluate(model, dataset)
        report = {"config": config.to_dict(), "mode": "direct evaluation"}
        report.update(_confusion_report(metrics, model.class_names))
        report["videos_used"] = dataset.num_rows
        report["videos_failed"] = len(failures)
    for _, msg in failures:
        print(f"warning: {msg}", file=sys.stderr)
    _emit_report(report, args.report)
    return EXIT_OK


def cmd_synth(args) -> int:
    manifest_path = synth.write_synthetic_dataset(
        args.outdir,
        samples_per_class=args.samples_per_class,
        seed=args.seed,
        num_points=args.points,
        noise=args.noise,
    )
    print(f"wrote {manifest_path}")
    rec = " ".join(f"--{k.replace('_', '-')} {v}" for k, v in synth.RECOMMENDED_PIPELINE.items())
    print(f"recommended training flags: {rec}".replace("--channel-mode", "--channels"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvesig",
        description="Curvature signatures of frame sequences, and action classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("signature", help="write the k1/k2 signature of one video")
    p.add_argument("video", help="image directory or CRV file")
    p.add_argument("--out", required=True, help="output CSV path (columns s,k1,k2,valid)")
    p.add_argument("--crv-out", default=None, help="optional binary signature export")
    _config_flags(p)
    p.set_defaults(func=cmd_signature)

    p = sub.add_parser("train", help="train a forest from a manifest")
    p.add_argument("manifest", help="CSV manifest: video_path,label[,mask_path][,background_path]")
    p.add_argument("--model-out", required=True, help="where to write the model file")
    p.add_argument("--report", default=None, help="also write the JSON report here")
    p.add_argument("--cv-folds", type=int, default=0,
                   help="additionally report k-fold cross-validation accuracy")
    _config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify videos with a trained model")
    p.add_argument("model", help="model file written by train")
    p.add_argument("videos", nargs="+", help="video inputs")
    p.add_argument("--votes", action="store_true", help="also emit the vote distribution")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluate a model against a labeled manifest")
    p.add_argument("model", help="model file written by train")
    p.add_argument("manifest", help="CSV manifest with ground-truth labels")
    p.add_argument("--folds", type=int, default=0,
                   help="retrain in k-fold cross-validation instead of direct evaluation")
    p.add_argument("--report", default=None, help="also write the JSON report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="emit the built-in synthetic curve dataset")
    p.add_argument("outdir", help="output directory for CRV files and manifest.csv")
    p.add_argument("--samples-per-class", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=synth.DEFAULT_POINTS,
                   help="samples per generated curve")
    p.add_argument("--noise", type=float, default=synth.DEFAULT_NOISE,
                   help="additive noise as a fraction of curve RMS radius")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CurveSigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
