"""Subgraph homomorphism engine.

Exact backtracking search, dual-simulation candidate pruning, and a learned
order-embedding verifier, combined into one decision pipeline, plus dataset
generation and a benchmark harness.
"""

__version__ = "0.1.0"

from hframe.graph import (  # noqa: F401
    EgoNet,
    Graph,
    GraphFormatError,
    LabelDict,
    build_graph,
    cycle_lengths,
    ego_net,
    induce,
    load_graph,
    write_graph,
)
from hframe.exact import (  # noqa: F401
    MatchOutcome,
    Verdict,
    brute_force_hom,
    hom_decide,
    hom_enumerate,
    verify_mapping,
)
from hframe.dualsim import FIXPOINT, CandidateMap, dual_sim, filter_graph  # noqa: F401
from hframe.model import (  # noqa: F401
    Model,
    ModelConfig,
    TrainingDiverged,
    embed,
    init_model,
    load_model,
    loss,
    normalize,
    predict,
    save_model,
    train_on_dataset,
    violation,
)
from hframe.pipeline import (  # noqa: F401
    Diagnostics,
    PipelineConfig,
    PipelineError,
    accelerate,
    decide,
    pivot,
    predict_anchored,
)
