"""Cohort ingestion: TSV parsing and the patient join.

Input follows cBioPortal-style exports reduced to the columns we use:
a mutations table (``patient_id``, ``gene``, optional ``sample_order``)
and a clinical table (``patient_id``, ``cancer_type``, ``stage``).
Files are UTF-8, tab-separated, header required; lines starting with
``#`` are skipped. Mutation identity is the gene symbol only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateClinicalError,
    MalformedRowError,
    MissingColumnError,
    UnknownStageError,
)

_ROMAN = {"i": 1, "ii": 2, "iii": 3, "iv": 4}


@dataclass(frozen=True)
class StageLabel:
    """Ordinal cancer stage in 1..4, parsed from its common spellings."""

    ordinal: int

    def __post_init__(self):
        if not 1 <= self.ordinal <= 4:
            raise UnknownStageError(str(self.ordinal))

    @classmethod
    def parse(cls, text: str, line: int | None = None) -> "StageLabel":
        """Accepts "1", "I", "Stage I", "stage1" and the analogous forms
        for stages 2-4, case-insensitively."""
        norm = text.strip().lower()
        if norm.startswith("stage"):
            norm = norm[len("stage"):].strip()
        if norm in _ROMAN:
            return cls(_ROMAN[norm])
        if norm in {"1", "2", "3", "4"}:
            return cls(int(norm))
        raise UnknownStageError(text, line)


@dataclass(frozen=True)
class MutationRecord:
    patient_id: str
    gene: str
    sample_order: int = 0

    def __post_init__(self):
        if not self.gene or any(c.isspace() for c in self.gene):
            raise MalformedRowError(0, f"bad gene symbol {self.gene!r}")
        if self.sample_order < 0:
            raise MalformedRowError(0, "negative sample_order")


@dataclass(frozen=True)
class ClinicalRecord:
    patient_id: str
    cancer_type: str
    stage: StageLabel


@dataclass(frozen=True)
class Patient:
    patient_id: str
    cancer_type: str
    stage: int
    genes: tuple[str, ...]


@dataclass
class Cohort:
    """Joined patients, each with an ordered mutation-gene sequence."""

    patients: list[Patient] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.patients)

    def __iter__(self):
        return iter(self.patients)

    def stage_sizes(self) -> dict[int, int]:
        sizes: dict[int, int] = {}
        for p in self.patients:
            sizes[p.stage] = sizes.get(p.stage, 0) + 1
        return sizes

    def cancer_types(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for p in self.patients:
            counts[p.cancer_type] = counts.get(p.cancer_type, 0) + 1
        return counts

    def restrict_to_type(self, cancer_type: str) -> "Cohort":
        return Cohort([p for p in self.patients if p.cancer_type == cancer_type])

    def restrict_to_patients(self, patient_ids) -> "Cohort":
        wanted = set(patient_ids)
        return Cohort([p for p in self.patients if p.patient_id in wanted])


def _read_rows(path: str | Path):
    """Yield (line_number, fields) for data rows; returns header first."""
    with open(path, encoding="utf-8") as fh:
        header = None
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if header is None:
                header = [f.strip() for f in fields]
                yield lineno, header
            else:
                yield lineno, fields


def _column_index(header: list[str], name: str, required: bool = True) -> int | None:
    try:
        return header.index(name)
    except ValueError:
        if required:
            raise MissingColumnError(name) from None
        return None


def parse_mutations(path: str | Path) -> list[MutationRecord]:
    """Parse the mutations TSV into records, preserving file order.

    Raises MissingColumnError if ``patient_id`` or ``gene`` is absent from
    the header, and MalformedRowError on any unusable data row; parsing
    aborts rather than returning a partial list.
    """
    rows = _read_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise MalformedRowError(1, "empty file") from None
    pid_ix = _column_index(header, "patient_id")
    gene_ix = _column_index(header, "gene")
    order_ix = _column_index(header, "sample_order", required=False)

    records = []
    for lineno, fields in rows:
        if len(fields) < len(header):
            raise MalformedRowError(lineno, "too few fields")
        pid = fields[pid_ix].strip()
        gene = fields[gene_ix].strip()
        if not pid:
            raise MalformedRowError(lineno, "empty patient_id")
        if not gene or any(c.isspace() for c in gene):
            raise MalformedRowError(lineno, f"bad gene symbol {gene!r}")
        order = 0
        if order_ix is not None and fields[order_ix].strip():
            try:
                order = int(fields[order_ix])
            except ValueError:
                raise MalformedRowError(lineno, "sample_order not an integer") from None
            if order < 0:
                raise MalformedRowError(lineno, "negative sample_order")
        records.append(MutationRecord(pid, gene, order))
    return records


def parse_clinical(path: str | Path) -> list[ClinicalRecord]:
    """Parse the clinical TSV; stage strings are normalized via StageLabel."""
    rows = _read_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise MalformedRowError(1, "empty file") from None
    pid_ix = _column_index(header, "patient_id")
    type_ix = _column_index(header, "cancer_type")
    stage_ix = _column_index(header, "stage")

    records = []
    for lineno, fields in rows:
        if len(fields) < len(header):
            raise MalformedRowError(lineno, "too few fields")
        pid = fields[pid_ix].strip()
        ctype = fields[type_ix].strip()
        if not pid:
            raise MalformedRowError(lineno, "empty patient_id")
        if not ctype:
            raise MalformedRowError(lineno, "empty cancer_type")
        stage = StageLabel.parse(fields[stage_ix], line=lineno)
        records.append(ClinicalRecord(pid, ctype, stage))
    return records


def build_cohort(
    mutations: list[MutationRecord],
    clinical: list[ClinicalRecord],
) -> tuple[Cohort, dict[str, int]]:
    """Join mutation and clinical records on patient_id.

    Patients lacking either side of the join are dropped and tallied in
    the returned discard summary: ``unmatched_mutations`` counts mutation
    records whose patient has no clinical row, ``no_clinical`` the distinct
    patients behind them, and ``no_mutations`` clinical patients with no
    mutation record. Two clinical rows for one patient are collapsed when
    identical and rejected (DuplicateClinicalError) when they disagree.
    """
    by_patient: dict[str, ClinicalRecord] = {}
    for rec in clinical:
        prev = by_patient.get(rec.patient_id)
        if prev is None:
            by_patient[rec.patient_id] = rec
        elif prev != rec:
            raise DuplicateClinicalError(rec.patient_id)

    sequences: dict[str, list[tuple[int, int, str]]] = {}
    unmatched_records = 0
    unmatched_patients = set()
    for file_pos, rec in enumerate(mutations):
        if rec.patient_id not in by_patient:
            unmatched_records += 1
            unmatched_patients.add(rec.patient_id)
            continue
        sequences.setdefault(rec.patient_id, []).append(
            (rec.sample_order, file_pos, rec.gene)
        )

    patients = []
    no_mutations = 0
    for pid, rec in by_patient.items():
        seq = sequences.get(pid)
        if not seq:
            no_mutations += 1
            continue
        seq.sort()  # ascending sample_order, ties by file position
        patients.append(
            Patient(pid, rec.cancer_type, rec.stage.ordinal, tuple(g for _, _, g in seq))
        )

    discards = {
        "unmatched_mutations": unmatched_records,
        "no_mutations": no_mutations,
        "no_clinical": len(unmatched_patients),
    }
    return Cohort(patients), discards


def write_cohort(cohort: Cohort, mutations_path: str | Path, clinical_path: str | Path) -> None:
    """Write a cohort back to the two TSV formats read by the parsers.

    Sequence order is preserved by emitting explicit sample_order values,
    so a parse of the written files reproduces the cohort exactly.
    """
    with open(mutations_path, "w", encoding="utf-8") as fh:
        fh.write("patient_id\tgene\tsample_order\n")
        for p in cohort:
            for order, gene in enumerate(p.genes):
                fh.write(f"{p.patient_id}\t{gene}\t{order}\n")
    with open(clinical_path, "w", encoding="utf-8") as fh:
        fh.write("patient_id\tcancer_type\tstage\n")
        for p in cohort:
            fh.write(f"{p.patient_id}\t{p.cancer_type}\t{p.stage}\n")
