"""Command-line interface wiring the pipeline stages.

Subcommands: synth, preprocess, train, evaluate, predict, ablate.
Progress goes to stderr; machine-readable outputs go to files under
--out. An optional TOML config file supplies flag defaults; explicit
flags always win. Exit codes: 0 success, 1 numeric/model failure,
2 input/config failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import DataError, NumericError
from .model import ModelConfig
from .pipeline import (
    ablation_run,
    load_input_cohort,
    run_evaluate,
    run_predict,
    run_preprocess,
    run_train,
    write_ablation_csv,
)
from .preprocess import PreprocessConfig
from .synthetic import GeneratorConfig, generate, write_cohort_files
from .training import TrainConfig


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embedding-dim", type=int, default=256)
    p.add_argument("--hidden-dim", type=int, default=64)
    p.add_argument("--dense-dim", type=int, default=64)


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--log-every", type=int, default=10)


def _add_preprocess_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--top-x", type=int, default=200)
    p.add_argument("--min-stage-fraction", type=float, default=0.10)
    p.add_argument("--min-class-size", type=int, default=300)
    p.add_argument("--split-fraction", type=float, default=0.80)
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--oversample", action="store_true")
    p.add_argument("--cancer-type", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oncoseq",
        description="Mutation-sequence pipeline: stage classification, "
        "progression forecasting, and drug recommendation.",
    )
    parser.add_argument(
        "--config", default=None, help="TOML file of flag defaults (flags override)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--stages", type=int, default=3)
    p.add_argument("--patients-per-stage", type=int, default=100)
    p.add_argument("--drivers-per-stage", type=int, default=5)
    p.add_argument("--driver-prob", type=float, default=0.8)
    p.add_argument("--noise-genes", type=int, default=200)
    p.add_argument("--noise-per-patient", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("preprocess", help="filter, encode, and split a cohort")
    p.add_argument("--mutations", required=True)
    p.add_argument("--clinical", required=True)
    _add_preprocess_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train the stage classifier")
    p.add_argument("--run", required=True, help="preprocess output directory")
    _add_model_flags(p)
    _add_train_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="accuracy, confusion, per-stage ROC")
    p.add_argument("--run", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", help="future mutations, heatmap, drugs")
    p.add_argument("--run", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--mutations", required=True)
    p.add_argument("--clinical", required=True)
    p.add_argument("--cancer-type", default=None)
    p.add_argument("--drug-db", default=None)
    p.add_argument("--validation-db", default=None)
    p.add_argument("--no-drugs", action="store_true")
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("ablate", help="top-x ablation grid")
    p.add_argument("--mutations", required=True)
    p.add_argument("--clinical", required=True)
    p.add_argument("--grid", required=True, help="comma-separated top-x values")
    _add_preprocess_flags(p)
    _add_model_flags(p)
    _add_train_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Load --config TOML values as parser defaults (flags still override)."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    if known.config is None:
        return
    with open(known.config, "rb") as fh:
        values = tomllib.load(fh)
    flat = {}
    for key, val in values.items():
        if isinstance(val, dict):
            for k, v in val.items():
                flat[k.replace("-", "_")] = v
        else:
            flat[key.replace("-", "_")] = val
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**{k: v for k, v in flat.items() if _has_dest(sp, k)})


def _has_dest(parser: argparse.ArgumentParser, dest: str) -> bool:
    return any(a.dest == dest for a in parser._actions)


def _pre_config(args) -> PreprocessConfig:
    return PreprocessConfig(
        top_x=args.top_x,
        min_stage_fraction=args.min_stage_fraction,
        min_class_size=args.min_class_size,
        split_fraction=args.split_fraction,
        seed=args.seed,
        oversample=args.oversample,
    )


def _model_config(args) -> ModelConfig:
    return ModelConfig(
        embedding_dim=args.embedding_dim,
        hidden_dim=args.hidden_dim,
        dense_dim=args.dense_dim,
        seed=args.seed,
    )


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        seed=args.seed,
        shuffle_each_epoch=not args.no_shuffle,
        log_every=args.log_every,
    )


def _cmd_synth(args) -> int:
    cfg = GeneratorConfig(
        n_stages=args.stages,
        patients_per_stage=args.patients_per_stage,
        drivers_per_stage=args.drivers_per_stage,
        driver_expression_prob=args.driver_prob,
        n_noise_genes=args.noise_genes,
        noise_genes_per_patient=args.noise_per_patient,
        seed=args.seed,
    )
    cohort, manifest = generate(cfg)
    paths = write_cohort_files(cohort, manifest, args.out)
    _progress(f"wrote {len(cohort)} patients to {paths['mutations']}")
    return 0


def _cmd_preprocess(args) -> int:
    prep = run_preprocess(
        args.mutations,
        args.clinical,
        _pre_config(args),
        args.out,
        cancer_type=args.cancer_type,
        max_len=args.max_len,
    )
    _progress(
        f"vocabulary {len(prep.vocab.genes)} genes, "
        f"{len(prep.train_ds)} train / {len(prep.test_ds)} test, "
        f"max_len {prep.max_len}"
    )
    return 0


def _cmd_train(args) -> int:
    _, history = run_train(args.run, _model_config(args), _train_config(args), args.out)
    _progress(f"trained {len(history)} epochs, final mean loss {history[-1]:.6f}")
    return 0


def _cmd_evaluate(args) -> int:
    report = run_evaluate(args.run, args.checkpoint, args.out, threads=args.threads)
    _progress(
        f"accuracy {report.accuracy:.4f}, mean AUC {report.mean_auc():.4f} "
        f"over {report.n_test} test patients"
    )
    return 0


def _cmd_predict(args) -> int:
    use_drugs = not args.no_drugs and args.drug_db and args.validation_db
    paths = run_predict(
        args.run,
        args.checkpoint,
        args.mutations,
        args.clinical,
        args.out,
        drug_db=args.drug_db if use_drugs else None,
        validation_db=args.validation_db if use_drugs else None,
        threshold=args.threshold,
        cancer_type=args.cancer_type,
        svg=args.svg,
        threads=args.threads,
    )
    _progress("wrote " + ", ".join(sorted(paths.values())))
    return 0


def _cmd_ablate(args) -> int:
    grid = [int(x) for x in args.grid.split(",") if x.strip()]
    cohort, _ = load_input_cohort(
        args.mutations, args.clinical, args.cancer_type, args.min_class_size
    )
    rows = ablation_run(
        cohort,
        grid,
        _pre_config(args),
        _model_config(args),
        _train_config(args),
        max_len=args.max_len,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_ablation_csv(rows, out / "ablation.csv")
    for row in rows:
        _progress(
            f"top_x {row.top_x}: accuracy {row.accuracy:.4f}, "
            f"mean AUC {row.mean_auc:.4f}"
        )
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "preprocess": _cmd_preprocess,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "predict": _cmd_predict,
    "ablate": _cmd_ablate,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
