"""jpegspace: the JPEG baseline codec, its multilinear (tensor) formulation,
and residual-network operators that act directly on DCT coefficients."""

from .tensor import LabeledTensor, contract, elementwise, reshape_fold, reshape_unfold

__version__ = "0.1.0"

__all__ = [
    "LabeledTensor",
    "contract",
    "elementwise",
    "reshape_fold",
    "reshape_unfold",
    "__version__",
]
