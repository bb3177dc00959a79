"""Preprocessing: frequency statistics, significant-mutation selection,
stage filtering, class weighting, encoding, and the train/test split.

The significant-mutation list S starts from the top-x genes overall and
then appends, stage by stage in ascending order, each stage's top-x genes
that are not already present. Frequencies count distinct patients, not
raw mutation events. Token ids reserve 0 for PAD and 1 for UNK.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .cohort import Cohort
from .errors import (
    AllStagesRemovedError,
    ClassTooSmallError,
    ConfigError,
    EmptyCohortError,
    ZeroClassSizeError,
)

PAD_ID = 0
UNK_ID = 1

MAX_LEN_CAP = 512


@dataclass(frozen=True)
class PreprocessConfig:
    top_x: int = 200
    min_stage_fraction: float = 0.10
    min_class_size: int = 300
    split_fraction: float = 0.80
    seed: int = 0
    oversample: bool = False

    def __post_init__(self):
        if self.top_x < 1:
            raise ConfigError("top_x must be >= 1")
        if not 0.0 <= self.min_stage_fraction < 1.0:
            raise ConfigError("min_stage_fraction must be in [0, 1)")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError("split_fraction must be in (0, 1)")


@dataclass
class FrequencyTable:
    """Distinct-patient counts per gene, overall and per stage."""

    overall: dict[str, int]
    per_stage: dict[int, dict[str, int]]
    stage_sizes: dict[int, int]


@dataclass
class MutationVocabulary:
    """Ordered significant-mutation list with its token-id map."""

    genes: list[str]
    top_x: int
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.index = {g: i + 2 for i, g in enumerate(self.genes)}
        if len(self.index) != len(self.genes):
            raise ValueError("duplicate genes in vocabulary")

    @property
    def size(self) -> int:
        return len(self.genes) + 2

    def id_for(self, gene: str) -> int:
        return self.index.get(gene, UNK_ID)

    def gene_for(self, token: int) -> str | None:
        if 2 <= token < self.size:
            return self.genes[token - 2]
        return None

    def to_json(self) -> str:
        return json.dumps({"genes": self.genes, "top_x": self.top_x}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MutationVocabulary":
        obj = json.loads(text)
        return cls(genes=list(obj["genes"]), top_x=int(obj["top_x"]))

    def content_hash(self) -> str:
        payload = json.dumps({"genes": self.genes}, sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


def save_vocabulary(vocab: MutationVocabulary, path: str | Path) -> None:
    Path(path).write_text(vocab.to_json() + "\n", encoding="utf-8")


def load_vocabulary(path: str | Path) -> MutationVocabulary:
    return MutationVocabulary.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass
class ClassWeights:
    """Per-stage class sizes c and balancing weights w = sum(c) / (2 c)."""

    counts: dict[int, int]
    weights: dict[int, float]


@dataclass
class EncodedDataset:
    """Padded token matrix plus contiguous class labels for the network."""

    sequences: np.ndarray  # (n, max_len) int64
    labels: np.ndarray  # (n,) int64 class ids
    class_map: dict[int, int]  # stage ordinal -> class id
    max_len: int
    patient_ids: list[str]

    def __len__(self) -> int:
        return int(self.sequences.shape[0])

    @property
    def n_classes(self) -> int:
        return len(self.class_map)

    def stage_for_class(self, class_id: int) -> int:
        for stage, cid in self.class_map.items():
            if cid == class_id:
                return stage
        raise KeyError(class_id)

    def class_sizes(self) -> dict[int, int]:
        sizes = {cid: 0 for cid in self.class_map.values()}
        for label in self.labels:
            sizes[int(label)] += 1
        return sizes

    def subset(self, indices) -> "EncodedDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return EncodedDataset(
            sequences=self.sequences[idx].copy(),
            labels=self.labels[idx].copy(),
            class_map=dict(self.class_map),
            max_len=self.max_len,
            patient_ids=[self.patient_ids[i] for i in idx],
        )


def count_frequencies(cohort: Cohort) -> FrequencyTable:
    """Count, per gene, the distinct patients expressing it, overall and
    within each stage."""
    if len(cohort) == 0:
        raise EmptyCohortError("cannot count frequencies of an empty cohort")
    overall: dict[str, int] = {}
    per_stage: dict[int, dict[str, int]] = {}
    stage_sizes: dict[int, int] = {}
    for p in cohort:
        stage_sizes[p.stage] = stage_sizes.get(p.stage, 0) + 1
        stage_counts = per_stage.setdefault(p.stage, {})
        for gene in set(p.genes):
            overall[gene] = overall.get(gene, 0) + 1
            stage_counts[gene] = stage_counts.get(gene, 0) + 1
    return FrequencyTable(overall, per_stage, stage_sizes)


def filter_small_stages(cohort: Cohort, cfg: PreprocessConfig) -> Cohort:
    """Drop patients in stages holding strictly less than
    cfg.min_stage_fraction of the cohort."""
    if len(cohort) == 0:
        raise EmptyCohortError("cannot filter an empty cohort")
    total = len(cohort)
    sizes = cohort.stage_sizes()
    keep = {s for s, n in sizes.items() if n / total >= cfg.min_stage_fraction}
    if not keep:
        raise AllStagesRemovedError(
            f"no stage reaches {cfg.min_stage_fraction:.0%} of {total} patients"
        )
    return Cohort([p for p in cohort if p.stage in keep])


def _top_x(counts: dict[str, int], x: int) -> list[str]:
    # descending count, ties by ascending gene symbol
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [gene for gene, _ in ranked[:x]]


def build_significant_set(freq: FrequencyTable, cfg: PreprocessConfig) -> MutationVocabulary:
    """Build the significant-mutation list: top-x overall first, then each
    stage's top-x (ascending stage order) minus genes already included."""
    if not freq.overall:
        raise EmptyCohortError("frequency table is empty")
    genes = _top_x(freq.overall, cfg.top_x)
    seen = set(genes)
    for stage in sorted(freq.per_stage):
        for gene in _top_x(freq.per_stage[stage], cfg.top_x):
            if gene not in seen:
                seen.add(gene)
                genes.append(gene)
    return MutationVocabulary(genes=genes, top_x=cfg.top_x)


def compute_class_weights(stage_sizes: dict[int, int]) -> ClassWeights:
    """Balancing weights w_i = sum(c) / (2 c_i) from class sizes c."""
    if not stage_sizes:
        raise ZeroClassSizeError("no classes given")
    for stage, count in stage_sizes.items():
        if count <= 0:
            raise ZeroClassSizeError(f"class {stage} has size {count}")
    total = sum(stage_sizes.values())
    weights = {s: total / (2.0 * c) for s, c in stage_sizes.items()}
    return ClassWeights(counts=dict(stage_sizes), weights=weights)


def default_max_len(cohort: Cohort) -> int:
    """95th percentile of sequence lengths, at least 1, capped at 512."""
    lengths = [len(p.genes) for p in cohort]
    if not lengths:
        raise EmptyCohortError("cannot size sequences of an empty cohort")
    q = float(np.percentile(np.asarray(lengths, dtype=np.float64), 95))
    return max(1, min(MAX_LEN_CAP, math.ceil(q)))


def encode(cohort: Cohort, vocab: MutationVocabulary, max_len: int) -> EncodedDataset:
    """Map each patient's gene sequence to token ids.

    Out-of-vocabulary genes become UNK; sequences are right-padded with
    PAD to max_len, or truncated keeping the first max_len tokens. Stage
    ordinals are re-indexed to contiguous class ids in ascending order.
    """
    if max_len < 1:
        raise ConfigError("max_len must be >= 1")
    stages = sorted({p.stage for p in cohort})
    class_map = {stage: cid for cid, stage in enumerate(stages)}
    n = len(cohort)
    seqs = np.full((n, max_len), PAD_ID, dtype=np.int64)
    labels = np.empty(n, dtype=np.int64)
    pids = []
    for i, p in enumerate(cohort):
        tokens = [vocab.id_for(g) for g in p.genes[:max_len]]
        seqs[i, : len(tokens)] = tokens
        labels[i] = class_map[p.stage]
        pids.append(p.patient_id)
    return EncodedDataset(seqs, labels, class_map, max_len, pids)


def decode(tokens, vocab: MutationVocabulary) -> list[str]:
    """Inverse of encode for in-vocabulary tokens; PAD and UNK are dropped."""
    genes = []
    for t in np.asarray(tokens).ravel():
        gene = vocab.gene_for(int(t))
        if gene is not None:
            genes.append(gene)
    return genes


def split(ds: EncodedDataset, cfg: PreprocessConfig) -> tuple[EncodedDataset, EncodedDataset]:
    """Stratified shuffled split: split_fraction of each class (rounded
    down, always leaving at least one test sample) goes to training.
    Deterministic for a fixed cfg.seed."""
    rng = np.random.default_rng(cfg.seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for cid in sorted(set(ds.class_map.values())):
        members = np.flatnonzero(ds.labels == cid)
        if members.size < 2:
            raise ClassTooSmallError(ds.stage_for_class(cid))
        perm = rng.permutation(members)
        n_train = int(math.floor(cfg.split_fraction * members.size))
        n_train = min(max(n_train, 1), members.size - 1)
        train_idx.extend(perm[:n_train].tolist())
        test_idx.extend(perm[n_train:].tolist())
    return ds.subset(sorted(train_idx)), ds.subset(sorted(test_idx))


def oversample_to_balance(ds: EncodedDataset, seed: int) -> EncodedDataset:
    """Upsample minority classes (with replacement) to the majority size.

    Off by default in the pipeline; class weighting is the primary
    balancing device and this is an optional addition.
    """
    rng = np.random.default_rng(seed)
    sizes = ds.class_sizes()
    target = max(sizes.values())
    extra: list[int] = []
    for cid in sorted(sizes):
        members = np.flatnonzero(ds.labels == cid)
        deficit = target - members.size
        if deficit > 0:
            extra.extend(rng.choice(members, size=deficit, replace=True).tolist())
    if not extra:
        return ds
    keep = list(range(len(ds))) + extra
    return ds.subset(keep)


def eligible_cancer_types(cohort: Cohort, min_class_size: int) -> list[str]:
    """Cancer-type codes with at least min_class_size patients."""
    return sorted(t for t, n in cohort.cancer_types().items() if n >= min_class_size)


def dataset_to_dict(ds: EncodedDataset) -> dict:
    return {
        "sequences": ds.sequences.tolist(),
        "labels": ds.labels.tolist(),
        "class_map": {str(stage): cid for stage, cid in ds.class_map.items()},
        "max_len": ds.max_len,
        "patient_ids": list(ds.patient_ids),
    }


def dataset_from_dict(obj: dict) -> EncodedDataset:
    return EncodedDataset(
        sequences=np.asarray(obj["sequences"], dtype=np.int64),
        labels=np.asarray(obj["labels"], dtype=np.int64),
        class_map={int(stage): cid for stage, cid in obj["class_map"].items()},
        max_len=int(obj["max_len"]),
        patient_ids=list(obj["patient_ids"]),
    )


def with_seed(cfg: PreprocessConfig, seed: int) -> PreprocessConfig:
    return replace(cfg, seed=seed)
