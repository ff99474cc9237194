"""Fuzziness-driven active learning for hyperspectral image classification.

The pipeline trains a classifier on a small labeled set, ranks the
unlabeled pool by membership fuzziness, keeps misclassified candidates from
the low/high fuzziness groups, blends their global and local class scatter
matrices into one symmetric objective, and queries the most heterogeneous
batch in the objective's eigenspace.
"""

__version__ = "0.1.0"

from .al_loop import ALConfig, IterationRecord, average_runs, run_baseline, run_experiment
from .classify import ClassifierModel, predict_labels, predict_memberships, train
from .data import (
    HsiCube,
    PatchSample,
    Sample,
    SplitState,
    SynthSpec,
    extract_patch,
    initial_split,
    load_cube,
    normalize,
    save_cube,
    synth_generate,
)
from .discriminant import (
    LocalGraphs,
    MldaState,
    ScatterSet,
    class_means,
    dmlda_step,
    generalized_eigh,
    generalized_topk,
    global_scatter,
    local_graphs,
    local_scatter,
    mlda_scatters,
    rmlda_alternate,
    scatter_set,
    symmetric_topk,
)
from .fuzziness import (
    FuzzinessGroups,
    FuzzinessRecord,
    build_table,
    categorize,
    matrix_fuzziness,
    sample_fuzziness,
    select_candidates,
)
from .metrics import (
    ConfusionMatrix,
    average_accuracy,
    confusion,
    kappa,
    overall_accuracy,
    prf,
)
from .objective import (
    ObjectiveMatrix,
    TradeoffParams,
    build_objective,
    combine_between,
    combine_within,
    discriminant_projection,
    select_heterogeneous,
)

__all__ = [name for name in dir() if not name.startswith("_")]
