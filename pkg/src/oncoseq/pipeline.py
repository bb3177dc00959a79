"""End-to-end orchestration and on-disk artifact formats.

A run directory produced by :func:`run_preprocess` holds vocab.json,
split.json, train.json, test.json, weights.json, and discards.json.
Training adds checkpoint.bin and loss.csv; evaluation adds report.json
and one roc_stage<S>.csv per stage; prediction adds predictions.json,
heatmap.csv (optionally heatmap.svg), and recommendations.json. All
writers are timestamp-free so identical inputs give identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .cohort import Cohort, build_cohort, parse_clinical, parse_mutations
from .drugs import DrugSource, load_drug_table, recommend
from .errors import ConfigError
from .model import ModelConfig, ModelParams, forward, init_params
from .preprocess import (
    ClassWeights,
    EncodedDataset,
    MutationVocabulary,
    PreprocessConfig,
    build_significant_set,
    compute_class_weights,
    count_frequencies,
    dataset_from_dict,
    dataset_to_dict,
    default_max_len,
    encode,
    filter_small_stages,
    load_vocabulary,
    oversample_to_balance,
    save_vocabulary,
    split,
)
from .progression import build_stage_gene_matrix, emit_heatmap, predict_future
from .training import EvalReport, TrainConfig, evaluate, predict_probabilities, train


def write_json(obj, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_json(path: str | Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Preprocess


@dataclass
class PreparedData:
    cohort: Cohort  # after stage filtering
    vocab: MutationVocabulary
    train_ds: EncodedDataset
    test_ds: EncodedDataset
    weights: ClassWeights
    max_len: int


def prepare(
    cohort: Cohort, cfg: PreprocessConfig, max_len: int | None = None
) -> PreparedData:
    """Stage filtering, vocabulary construction, encoding, and the split.

    Class weights come from the training partition's per-stage sizes,
    which are what the weighted softmax is balancing.
    """
    filtered = filter_small_stages(cohort, cfg)
    freq = count_frequencies(filtered)
    vocab = build_significant_set(freq, cfg)
    if max_len is None:
        max_len = default_max_len(filtered)
    ds = encode(filtered, vocab, max_len)
    train_ds, test_ds = split(ds, cfg)
    if cfg.oversample:
        train_ds = oversample_to_balance(train_ds, cfg.seed)
    sizes = {
        train_ds.stage_for_class(cid): n for cid, n in train_ds.class_sizes().items()
    }
    weights = compute_class_weights(sizes)
    return PreparedData(filtered, vocab, train_ds, test_ds, weights, max_len)


def load_input_cohort(
    mutations_path: str | Path,
    clinical_path: str | Path,
    cancer_type: str | None = None,
    min_class_size: int = 0,
) -> tuple[Cohort, dict]:
    """Parse and join the two TSVs; optionally restrict to one cancer type.

    With several cancer types present and none selected, the run aborts
    and names the types large enough to run (at least min_class_size
    patients).
    """
    cohort, discards = build_cohort(
        parse_mutations(mutations_path), parse_clinical(clinical_path)
    )
    types = cohort.cancer_types()
    if cancer_type is not None:
        if cancer_type not in types:
            raise ConfigError(f"cancer type {cancer_type!r} not present in cohort")
        cohort = cohort.restrict_to_type(cancer_type)
    elif len(types) > 1:
        eligible = sorted(t for t, n in types.items() if n >= min_class_size)
        raise ConfigError(
            "cohort mixes cancer types; pick one with --cancer-type "
            f"(eligible: {', '.join(eligible) or 'none'})"
        )
    return cohort, discards


def run_preprocess(
    mutations_path: str | Path,
    clinical_path: str | Path,
    cfg: PreprocessConfig,
    out_dir: str | Path,
    cancer_type: str | None = None,
    max_len: int | None = None,
) -> PreparedData:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cohort, discards = load_input_cohort(
        mutations_path, clinical_path, cancer_type, cfg.min_class_size
    )
    prep = prepare(cohort, cfg, max_len=max_len)
    save_vocabulary(prep.vocab, out / "vocab.json")
    write_json(
        {"train": prep.train_ds.patient_ids, "test": prep.test_ds.patient_ids},
        out / "split.json",
    )
    write_json(dataset_to_dict(prep.train_ds), out / "train.json")
    write_json(dataset_to_dict(prep.test_ds), out / "test.json")
    write_json(
        {
            "counts": {str(s): c for s, c in sorted(prep.weights.counts.items())},
            "weights": {str(s): w for s, w in sorted(prep.weights.weights.items())},
        },
        out / "weights.json",
    )
    write_json(discards, out / "discards.json")
    return prep


def load_run_dir(run_dir: str | Path):
    run = Path(run_dir)
    vocab = load_vocabulary(run / "vocab.json")
    train_ds = dataset_from_dict(read_json(run / "train.json"))
    test_ds = dataset_from_dict(read_json(run / "test.json"))
    wobj = read_json(run / "weights.json")
    weights = ClassWeights(
        counts={int(s): c for s, c in wobj["counts"].items()},
        weights={int(s): w for s, w in wobj["weights"].items()},
    )
    return vocab, train_ds, test_ds, weights


# ---------------------------------------------------------------------------
# Train / evaluate


def run_train(
    run_dir: str | Path,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    out_dir: str | Path,
) -> tuple[ModelParams, list[float]]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vocab, train_ds, _, weights = load_run_dir(run_dir)
    params = init_params(vocab.size, train_ds.n_classes, model_cfg)
    params, history = train(train_ds, params, weights, train_cfg)
    meta = {
        "class_map": {str(s): c for s, c in train_ds.class_map.items()},
        "max_len": train_ds.max_len,
    }
    save_checkpoint(params, vocab, out / "checkpoint.bin", meta=meta)
    lines = ["epoch,mean_loss"]
    lines += [f"{i + 1},{loss!r}" for i, loss in enumerate(history)]
    (out / "loss.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return params, history


def run_evaluate(
    run_dir: str | Path,
    checkpoint_path: str | Path,
    out_dir: str | Path,
    threads: int = 1,
) -> EvalReport:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vocab, _, test_ds, _ = load_run_dir(run_dir)
    params, _ = load_checkpoint(checkpoint_path, vocab)
    report = evaluate(test_ds, params, threads=threads)
    write_json(report.to_dict(), out / "report.json")
    for curve in report.per_class:
        lines = ["class,fpr,tpr"]
        lines += [f"{curve.class_id},{x!r},{y!r}" for x, y in curve.points]
        (out / f"roc_stage{curve.class_id}.csv").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
    return report


# ---------------------------------------------------------------------------
# Predict (progression + drugs)


def run_predict(
    run_dir: str | Path,
    checkpoint_path: str | Path,
    mutations_path: str | Path,
    clinical_path: str | Path,
    out_dir: str | Path,
    drug_db: str | Path | None = None,
    validation_db: str | Path | None = None,
    threshold: float = 0.05,
    cancer_type: str | None = None,
    svg: bool = False,
    threads: int = 1,
) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    run = Path(run_dir)
    vocab = load_vocabulary(run / "vocab.json")
    params, meta = load_checkpoint(checkpoint_path, vocab)
    class_map = {int(s): c for s, c in meta["class_map"].items()}
    stage_of_class = {c: s for s, c in class_map.items()}
    max_len = int(meta["max_len"])

    cohort, _ = load_input_cohort(mutations_path, clinical_path, cancer_type)
    manifest = read_json(run / "split.json")
    train_cohort = cohort.restrict_to_patients(manifest["train"])
    test_cohort = cohort.restrict_to_patients(manifest["test"])
    if len(test_cohort) == 0:
        raise ConfigError("split manifest matches no test patients in the cohort")

    train_ds = encode(train_cohort, vocab, max_len)
    matrix = build_stage_gene_matrix(train_ds, vocab, cohort)
    emit_heatmap(
        matrix, out / "heatmap.csv", svg_path=(out / "heatmap.svg") if svg else None
    )

    test_ds = encode(test_cohort, vocab, max_len)
    probs = predict_probabilities(test_ds, params, threads=threads)
    predicted_stages = [stage_of_class[int(c)] for c in probs.argmax(axis=1)]

    predictions = []
    for i, patient in enumerate(test_cohort):
        predictions.append(
            predict_future(
                test_ds.sequences[i],
                predicted_stages[i],
                matrix,
                threshold,
                patient_id=patient.patient_id,
            )
        )
    write_json([p.to_dict() for p in predictions], out / "predictions.json")

    paths = {
        "predictions": str(out / "predictions.json"),
        "heatmap_csv": str(out / "heatmap.csv"),
    }
    if svg:
        paths["heatmap_svg"] = str(out / "heatmap.svg")
    if drug_db is not None and validation_db is not None:
        primary = load_drug_table(drug_db, DrugSource.PRIMARY_DB)
        validation = load_drug_table(validation_db, DrugSource.VALIDATION_DB)
        future_genes = sorted({g for p in predictions for g, _ in p.future})
        recs = recommend(future_genes, primary, validation)
        write_json([r.to_dict() for r in recs], out / "recommendations.json")
        paths["recommendations"] = str(out / "recommendations.json")
    return paths


# ---------------------------------------------------------------------------
# Full runs and the top-x ablation


@dataclass
class FullRunResult:
    prep: PreparedData
    params: ModelParams
    history: list[float]
    report: EvalReport


def run_full(
    cohort: Cohort,
    pre_cfg: PreprocessConfig,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    max_len: int | None = None,
) -> FullRunResult:
    prep = prepare(cohort, pre_cfg, max_len=max_len)
    params = init_params(prep.vocab.size, prep.train_ds.n_classes, model_cfg)
    params, history = train(prep.train_ds, params, prep.weights, train_cfg)
    report = evaluate(prep.test_ds, params)
    return FullRunResult(prep, params, history, report)


@dataclass
class AblationRow:
    top_x: int
    accuracy: float
    mean_auc: float


def ablation_run(
    cohort: Cohort,
    x_grid: list[int],
    pre_cfg: PreprocessConfig,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    max_len: int | None = None,
) -> list[AblationRow]:
    """Run the full pipeline once per top-x value.

    Seeds are shared across runs, and because the split depends only on
    labels and the seed, every run sees the identical train/test patient
    partition.
    """
    if not x_grid:
        raise ConfigError("ablation grid is empty")
    rows = []
    for x in x_grid:
        result = run_full(
            cohort, replace(pre_cfg, top_x=x), model_cfg, train_cfg, max_len=max_len
        )
        rows.append(
            AblationRow(
                top_x=x,
                accuracy=result.report.accuracy,
                mean_auc=result.report.mean_auc(),
            )
        )
    return rows


def write_ablation_csv(rows: list[AblationRow], path: str | Path) -> None:
    lines = ["top_x,accuracy,mean_auc"]
    lines += [f"{r.top_x},{r.accuracy!r},{r.mean_auc!r}" for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
