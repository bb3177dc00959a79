"""oncoseq: mutation-sequence stage classification and progression
forecasting with a from-scratch bidirectional LSTM."""

from .cohort import (
    ClinicalRecord,
    Cohort,
    MutationRecord,
    Patient,
    StageLabel,
    build_cohort,
    parse_clinical,
    parse_mutations,
    write_cohort,
)
from .drugs import DrugSource, Recommendation, load_drug_table, recommend
from .metrics import RocCurve, roc_points
from .model import (
    ModelConfig,
    ModelParams,
    bilstm,
    embed,
    forward,
    init_params,
    loss_and_grads,
    lstm_forward,
    weighted_softmax,
)
from .optim import AdamState, adam_init, adam_step
from .pipeline import ablation_run, prepare, run_full
from .preprocess import (
    ClassWeights,
    EncodedDataset,
    FrequencyTable,
    MutationVocabulary,
    PreprocessConfig,
    build_significant_set,
    compute_class_weights,
    count_frequencies,
    encode,
    filter_small_stages,
    split,
)
from .progression import (
    ProgressionPrediction,
    StageGeneMatrix,
    build_stage_gene_matrix,
    emit_heatmap,
    predict_future,
)
from .synthetic import GeneratorConfig, generate
from .training import EvalReport, TrainConfig, evaluate, train

__version__ = "0.1.0"
