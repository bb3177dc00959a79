"""Synthetic cohorts with planted stage-specific driver mutations.

Progression is cumulative: a stage-s patient expresses each driver gene
of stages 1..s independently with the configured probability, modeling
stage as a linear progression, plus a fixed number of uniformly drawn
noise genes. Driver and noise gene namespaces are disjoint, and sequence
order is stage-1 drivers, then stage-2 drivers, and so on, then noise,
shuffled within each group — so stage is genuinely encoded in sequence
structure, not just in the bag of genes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .cohort import Cohort, Patient, write_cohort
from .errors import ConfigError

CANCER_TYPE_CODE = "SYNTH"


@dataclass(frozen=True)
class GeneratorConfig:
    n_stages: int = 3
    patients_per_stage: int = 100
    drivers_per_stage: int = 5
    driver_expression_prob: float = 0.8
    n_noise_genes: int = 200
    noise_genes_per_patient: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.n_stages <= 4:
            raise ConfigError("n_stages must be in 2..4")
        for name in ("patients_per_stage", "drivers_per_stage", "n_noise_genes",
                     "noise_genes_per_patient"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 0.0 < self.driver_expression_prob <= 1.0:
            raise ConfigError("driver_expression_prob must be in (0, 1]")
        if self.noise_genes_per_patient > self.n_noise_genes:
            raise ConfigError("noise_genes_per_patient exceeds the noise pool")


def driver_gene(stage: int, index: int) -> str:
    return f"DRV{stage}_{index:02d}"


def noise_gene(index: int) -> str:
    return f"NSE{index:04d}"


def generate(cfg: GeneratorConfig) -> tuple[Cohort, dict]:
    """Deterministic synthetic cohort plus its ground-truth manifest.

    The manifest lists the planted driver genes per stage and echoes the
    config. Every patient carries at least one noise gene, so sequences
    are never empty even when no driver fires.
    """
    rng = np.random.default_rng(cfg.seed)
    drivers = {
        s: [driver_gene(s, i) for i in range(cfg.drivers_per_stage)]
        for s in range(1, cfg.n_stages + 1)
    }
    noise_pool = np.array([noise_gene(i) for i in range(cfg.n_noise_genes)])

    patients = []
    pid = 0
    for stage in range(1, cfg.n_stages + 1):
        for _ in range(cfg.patients_per_stage):
            pid += 1
            genes: list[str] = []
            for s in range(1, stage + 1):
                group = [
                    g for g in drivers[s]
                    if rng.random() < cfg.driver_expression_prob
                ]
                rng.shuffle(group)
                genes.extend(group)
            noise = rng.choice(
                noise_pool, size=cfg.noise_genes_per_patient, replace=False
            )
            genes.extend(noise.tolist())
            patients.append(
                Patient(f"P{pid:05d}", CANCER_TYPE_CODE, stage, tuple(genes))
            )

    manifest = {
        "config": asdict(cfg),
        "drivers_per_stage": {str(s): list(g) for s, g in drivers.items()},
    }
    return Cohort(patients), manifest


def write_cohort_files(cohort: Cohort, manifest: dict, out_dir: str | Path) -> dict:
    """Emit mutations.tsv, clinical.tsv, and manifest.json under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "mutations": out / "mutations.tsv",
        "clinical": out / "clinical.tsv",
        "manifest": out / "manifest.json",
    }
    write_cohort(cohort, paths["mutations"], paths["clinical"])
    paths["manifest"].write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return {k: str(v) for k, v in paths.items()}
