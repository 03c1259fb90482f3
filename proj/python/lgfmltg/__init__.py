"""Multi-level temporal graph network for industrial fault diagnosis.

Python bindings over the C++ core: dynamic correlation graphs, the
LSTM + GraphSAGE + hierarchical-pooling pipeline, and diagnosis metrics.
"""

from ._core import (
    LgfError,
    class_metrics,
    correlation_adjacency,
    cross_entropy,
    gradcheck_max_error,
    pearson,
    synth_dataset,
    train_synthetic,
    __version__,
)

__all__ = [
    "LgfError",
    "class_metrics",
    "correlation_adjacency",
    "cross_entropy",
    "gradcheck_max_error",
    "pearson",
    "synth_dataset",
    "train_synthetic",
    "__version__",
]
