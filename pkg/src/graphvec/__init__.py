"""Multilingual word embeddings from labeled-graph contexts.

Text adjacency, translation alignments and syntactic dependencies become
one labeled multigraph per sentence (pair); neighborhoods under a
per-label distance budget replace the SkipGram context window, so plain
window models, dependency-context models and bilingual alignment models
are all instances of one trainer.
"""

from .corpus import (
    ReaderStats,
    Sentence,
    TaggedWord,
    TrainingUnit,
    UnitSource,
    Vocabulary,
    build_vocabulary,
    read_dependency,
    read_monolingual,
    read_parallel,
)
from .embeddings import EmbeddingStore, load, save
from .evaluation import (
    AnalogyDataset,
    EvalReport,
    SimilarityDataset,
    TranslationDataset,
    bootstrap_ci,
    eval_analogy,
    eval_similarity,
    eval_translation,
    spearman_rho,
)
from .graphspec import (
    CompositeSpec,
    ModelSpec,
    SpecError,
    distance_of,
    parse_composite,
    parse_spec,
)
from .lexicon import LexiconEntry, PoovCriteria, export_phrase_table, find_poovs, induce
from .neighborhood import (
    UnitGraph,
    brute_force_neighborhood,
    build_unit_graph,
    generate_pairs,
    neighborhood,
)
from .sampler import NegativeSamplingTable, build_table, make_rng, sample_negatives
from .trainer import (
    EmbeddingModel,
    TrainConfig,
    TrainStats,
    init_model,
    pair_objective,
    sgd_step,
    train,
)

__version__ = "0.1.0"
