"""Label-free embedding quality metrics built on Vietoris-Rips persistence."""

__version__ = "0.1.0"

from .core import (
    METRIC_NAMES,
    DistanceMatrix,
    MetricKind,
    MetricReport,
    PersistenceDiagram,
    PersistencePair,
    check_embedding,
    diameter,
    pairwise_distances,
)
from .homology import (
    persistence_metric,
    rips_h0_diagram,
    rips_h1_diagram,
    total_persistence,
)
from .spectral import (
    alpha_req,
    mu0_incoherence,
    nesum,
    pc_number,
    rankme,
    self_cluster,
    spectral_report,
    stable_rank,
)
from .harness import evaluate, pearson, scaling_experiment, selection_quality, spearman
