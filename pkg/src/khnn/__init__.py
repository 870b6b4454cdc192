"""Neural-network layers that compute over finite-dimensional algebras.

Algebras are given by structure-constants tensors; Dense and Conv
1D/2D/3D layers lower their algebra-valued weights to block-structured
real computations backed by a small autodiff tensor engine.
"""

from .algebra import (
    AlgebraError,
    StructureConstants,
    cayley_dickson,
    check_alternative,
    check_associative,
    check_commutative,
    check_unit,
    from_entries,
    load_algebra,
    predefined,
    predefined_names,
    save_algebra,
)
from .layers import (
    Activation,
    Dense,
    Flatten,
    GlobalMaxPool,
    HyperConv1D,
    HyperConv2D,
    HyperConv3D,
    HyperDense,
    assemble_block_matrix,
    assemble_conv_kernel,
)
from .model import ModelLoadError, Sequential, load_model, save_model
from .tensor import ShapeError, Tensor, finite_diff_check, no_grad, zero_grad
from .training import (
    SGD,
    Adam,
    TrainHistory,
    TrainingDiverged,
    accuracy,
    bce_loss,
    evaluate,
    fit,
)

__version__ = "0.1.0"

__all__ = [
    "Activation", "Adam", "AlgebraError", "Dense", "Flatten", "GlobalMaxPool",
    "HyperConv1D", "HyperConv2D", "HyperConv3D", "HyperDense", "ModelLoadError",
    "SGD", "Sequential", "ShapeError", "StructureConstants", "Tensor",
    "TrainHistory", "TrainingDiverged", "accuracy", "assemble_block_matrix",
    "assemble_conv_kernel", "bce_loss", "cayley_dickson", "check_alternative",
    "check_associative", "check_commutative", "check_unit", "evaluate",
    "finite_diff_check", "fit", "from_entries", "load_algebra", "load_model",
    "no_grad", "predefined", "predefined_names", "save_algebra", "save_model",
    "zero_grad",
]
