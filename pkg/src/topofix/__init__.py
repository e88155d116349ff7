"""Topology-aware post-processing of multi-class probability grids."""

__version__ = "0.1.0"

from .baseline import cca_clean, label_components, betti_mask
from .cubical import Cell, FilteredComplex, binarise, build_complex
from .export import (
    read_barcode_csv,
    render_barcode_svg,
    write_barcode_csv,
)
from .grids import (
    CLASS_BG,
    CLASS_LV,
    CLASS_MY,
    CLASS_NAMES,
    CLASS_RV,
    FOREGROUND_CLASSES,
    GridFormatError,
    LabelMask,
    MultiClassProb,
    ProbMap,
    load_grid,
    save_grid,
)
from .loss import (
    GradField,
    LossBreakdown,
    LossEntry,
    topo_loss,
    topo_loss_raw,
    topo_loss_single,
    union_prob,
)
from .metrics import dsc, evaluate_suite, mean_dsc, topologically_correct
from .persistence import (
    Barcode,
    PersistencePair,
    barcode_of,
    betti_at,
    compute_barcode,
    lifetime,
)
from .phantom import (
    CorruptionError,
    CorruptionSpec,
    GeometryError,
    PhantomSpec,
    corrupt,
    corrupt_with_info,
    generate,
    soften_mask,
)
from .priors import (
    BettiPrior,
    load_prior,
    prior_from_mask,
    save_prior,
    short_axis_prior,
    union_mask,
)
from .refine import RefineConfig, RefineReport, RefinementError, argmax_mask, refine

__all__ = [
    "__version__",
    "Barcode",
    "BettiPrior",
    "Cell",
    "CLASS_BG",
    "CLASS_LV",
    "CLASS_MY",
    "CLASS_NAMES",
    "CLASS_RV",
    "CorruptionError",
    "CorruptionSpec",
    "FOREGROUND_CLASSES",
    "FilteredComplex",
    "GeometryError",
    "GradField",
    "GridFormatError",
    "LabelMask",
    "LossBreakdown",
    "LossEntry",
    "MultiClassProb",
    "PersistencePair",
    "PhantomSpec",
    "ProbMap",
    "RefineConfig",
    "RefineReport",
    "RefinementError",
    "argmax_mask",
    "barcode_of",
    "betti_at",
    "betti_mask",
    "binarise",
    "build_complex",
    "cca_clean",
    "compute_barcode",
    "corrupt",
    "corrupt_with_info",
    "dsc",
    "evaluate_suite",
    "generate",
    "label_components",
    "lifetime",
    "load_grid",
    "load_prior",
    "mean_dsc",
    "prior_from_mask",
    "read_barcode_csv",
    "refine",
    "render_barcode_svg",
    "save_grid",
    "save_prior",
    "short_axis_prior",
    "soften_mask",
    "topo_loss",
    "topo_loss_raw",
    "topo_loss_single",
    "topologically_correct",
    "union_mask",
    "union_prob",
]
