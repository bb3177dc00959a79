"""Stage-conditional mutation forecasting and the stage-gene heatmap.

The stage-gene matrix holds, for every surviving stage and vocabulary
gene, the fraction of that stage's training patients expressing the
gene. Future-mutation prediction reads the row of a patient's predicted
stage and reports every gene at or above a probability threshold that
the patient does not already carry. Frequencies come from the training
partition only.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cohort import Cohort
from .errors import EmptyStageError, UnknownStageError
from .preprocess import EncodedDataset, MutationVocabulary


@dataclass
class StageGeneMatrix:
    stages: list[int]  # ascending stage ordinals
    genes: list[str]  # vocabulary order
    values: np.ndarray  # (stages, genes) fractions in [0, 1]

    def row(self, stage: int) -> np.ndarray:
        try:
            return self.values[self.stages.index(stage)]
        except ValueError:
            raise UnknownStageError(str(stage)) from None


@dataclass
class ProgressionPrediction:
    patient_id: str
    predicted_stage: int
    future: list[tuple[str, float]]  # (gene, probability), descending

    def to_dict(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "predicted_stage": self.predicted_stage,
            "future": [{"gene": g, "probability": p} for g, p in self.future],
        }


def build_stage_gene_matrix(
    train_ds: EncodedDataset, vocab: MutationVocabulary, cohort: Cohort
) -> StageGeneMatrix:
    """Per-stage expression frequencies over the training patients.

    Entry (s, g) counts distinct training patients of stage s carrying
    gene g, divided by the stage's training-patient count. Gene sets come
    from the cohort's full sequences, so truncation during encoding does
    not bias the frequencies.
    """
    train_ids = set(train_ds.patient_ids)
    stages = sorted(train_ds.class_map)
    by_id = {p.patient_id: p for p in cohort}
    stage_totals = {s: 0 for s in stages}
    counts = {s: np.zeros(len(vocab.genes)) for s in stages}
    gene_pos = {g: i for i, g in enumerate(vocab.genes)}
    for pid in train_ds.patient_ids:
        patient = by_id.get(pid)
        if patient is None or patient.stage not in stage_totals:
            continue
        stage_totals[patient.stage] += 1
        for gene in set(patient.genes):
            pos = gene_pos.get(gene)
            if pos is not None:
                counts[patient.stage][pos] += 1
    for s in stages:
        if stage_totals[s] == 0:
            raise EmptyStageError(s)
    values = np.stack([counts[s] / stage_totals[s] for s in stages])
    return StageGeneMatrix(stages=stages, genes=list(vocab.genes), values=values)


def predict_future(
    tokens,
    predicted_stage: int,
    matrix: StageGeneMatrix,
    threshold: float,
    patient_id: str = "",
) -> ProgressionPrediction:
    """Rank the genes a patient is likely to acquire at the predicted stage.

    Candidates are vocabulary genes whose stage frequency is at or above
    the threshold, minus genes already present in the input tokens. The
    reported probability is the stage frequency itself. Output is sorted
    by descending probability with lexicographic tie-breaks.
    """
    row = matrix.row(predicted_stage)
    n_genes = len(matrix.genes)
    present = set()
    for t in np.asarray(tokens, dtype=np.int64).ravel():
        if 2 <= t < n_genes + 2:
            present.add(matrix.genes[t - 2])
    future = [
        (gene, float(p))
        for gene, p in zip(matrix.genes, row)
        if p >= threshold and gene not in present
    ]
    future.sort(key=lambda gp: (-gp[1], gp[0]))
    return ProgressionPrediction(
        patient_id=patient_id, predicted_stage=predicted_stage, future=future
    )


def emit_heatmap(
    matrix: StageGeneMatrix, path: str | Path, svg_path: str | Path | None = None
) -> None:
    """Write the matrix as CSV (values at 4 decimal places), and optionally
    as an SVG grid with a linear white-to-red ramp."""
    lines = ["stage," + ",".join(matrix.genes)]
    for stage, row in zip(matrix.stages, matrix.values):
        lines.append(f"{stage}," + ",".join(f"{v:.4f}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if svg_path is not None:
        Path(svg_path).write_text(_heatmap_svg(matrix), encoding="utf-8")


def _heatmap_svg(matrix: StageGeneMatrix, cell: int = 36) -> str:
    left, top, label_h = 64, 12, 110
    width = left + cell * len(matrix.genes) + 12
    height = top + cell * len(matrix.stages) + label_h
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        '<style>text{font-family:sans-serif;font-size:11px;}</style>',
    ]
    for r, stage in enumerate(matrix.stages):
        y = top + r * cell
        parts.append(
            f'<text x="{left - 8}" y="{y + cell / 2 + 4}" text-anchor="end">'
            f"Stage {stage}</text>"
        )
        for c in range(len(matrix.genes)):
            v = float(matrix.values[r, c])
            gb = round(255 * (1.0 - v))
            parts.append(
                f'<rect x="{left + c * cell}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="rgb(255,{gb},{gb})" stroke="#999"/>'
            )
    base = top + cell * len(matrix.stages) + 14
    for c, gene in enumerate(matrix.genes):
        x = left + c * cell + cell / 2
        parts.append(
            f'<text x="{x}" y="{base}" text-anchor="end" '
            f'transform="rotate(-60 {x} {base})">{gene}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
