"""
Reverse-mode automatic differentiation over float64 numpy arrays.
"""

from . import ops
from .gradcheck import GradcheckResult, gradcheck
from .tensor import Tensor, TapeNode, as_tensor, is_grad_enabled, no_grad

__all__ = ["ops", "GradcheckResult", "gradcheck", "Tensor", "TapeNode", "as_tensor", "is_grad_enabled", "no_grad"]
