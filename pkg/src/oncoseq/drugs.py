"""Drug-target lookup: a primary interaction table cross-checked against
an independent validation table.

Tables are TSVs with columns ``drug_name``, ``gene``, and optional
``action``. Drug names are normalized to lowercase; matching is exact on
the normalized (drug_name, gene) pair. Drugs found only in the primary
table are kept but flagged unvalidated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

from .cohort import _column_index, _read_rows
from .errors import MalformedRowError


class DrugSource(enum.Enum):
    PRIMARY_DB = "primary_db"
    VALIDATION_DB = "validation_db"


@dataclass(frozen=True)
class DrugTargetRecord:
    drug_name: str  # lowercase
    gene: str
    action: str
    source: DrugSource


@dataclass(frozen=True)
class DrugHit:
    drug_name: str
    action: str
    validated: bool


@dataclass
class Recommendation:
    gene: str
    drugs: list[DrugHit]

    def to_dict(self) -> dict:
        return {
            "gene": self.gene,
            "drugs": [
                {"drug_name": d.drug_name, "action": d.action, "validated": d.validated}
                for d in self.drugs
            ],
        }


def load_drug_table(path: str | Path, source: DrugSource) -> list[DrugTargetRecord]:
    """Parse a drug-target TSV; duplicate (drug, gene) rows collapse to the
    first occurrence."""
    rows = _read_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise MalformedRowError(1, "empty file") from None
    drug_ix = _column_index(header, "drug_name")
    gene_ix = _column_index(header, "gene")
    action_ix = _column_index(header, "action", required=False)

    records = []
    seen = set()
    for lineno, fields in rows:
        if len(fields) < len(header):
            raise MalformedRowError(lineno, "too few fields")
        drug = fields[drug_ix].strip().lower()
        gene = fields[gene_ix].strip()
        if not drug or not gene:
            raise MalformedRowError(lineno, "empty drug_name or gene")
        if (drug, gene) in seen:
            continue
        seen.add((drug, gene))
        action = fields[action_ix].strip() if action_ix is not None else ""
        records.append(DrugTargetRecord(drug, gene, action, source))
    return records


def recommend(
    genes,
    primary: list[DrugTargetRecord],
    validation: list[DrugTargetRecord],
) -> list[Recommendation]:
    """Per requested gene, every primary-table drug targeting it, flagged
    validated when the same (drug, gene) pair appears in the validation
    table. Genes without hits still yield an (empty) entry; each requested
    gene appears exactly once, in first-seen order."""
    validated_pairs = {(r.drug_name, r.gene) for r in validation}
    by_gene: dict[str, dict[str, str]] = {}
    for rec in primary:
        by_gene.setdefault(rec.gene, {}).setdefault(rec.drug_name, rec.action)

    out = []
    seen_genes = set()
    for gene in genes:
        if gene in seen_genes:
            continue
        seen_genes.add(gene)
        hits = [
            DrugHit(drug, action, (drug, gene) in validated_pairs)
            for drug, action in by_gene.get(gene, {}).items()
        ]
        hits.sort(key=lambda h: (not h.validated, h.drug_name))
        out.append(Recommendation(gene=gene, drugs=hits))
    return out
