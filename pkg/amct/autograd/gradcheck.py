"""
Central finite-difference gradient checking.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .tensor import Tensor

DEFAULT_STEP = 1e-5


@dataclass
class GradcheckResult:
    """Worst elementwise |analytic - numeric| / max(1, |numeric|) per parameter."""

    max_relative_error: float
    per_parameter: Dict[str, float] = field(default_factory=dict)
    entries_checked: int = 0

    def passed(self, tolerance: float) -> bool:
        return self.max_relative_error < tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    return np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))


def gradcheck(
    loss_fn: Callable[[], Tensor],
    parameters: Sequence[Tensor],
    step: float = DEFAULT_STEP,
    max_entries: Optional[int] = None,
    seed: int = 0,
) -> GradcheckResult:
    """
    Compare backward() gradients with central differences.

    `loss_fn` must rebuild the graph from the current parameter values on
    every call and return a scalar. Parameters are perturbed in place and
    restored.

    Args:
        loss_fn: Builds and returns the scalar loss
        parameters: Leaf tensors to check
        step: Finite-difference step h
        max_entries: Per-parameter cap on checked entries, sampled with `seed`
        seed: Sampling seed

    Returns:
        GradcheckResult
    """
    for parameter in parameters:
        parameter.zero_grad()
    loss_fn().backward()
    analytic = [
        p.grad.copy() if p.grad is not None else np.zeros_like(p.data)
        for p in parameters
    ]

    rng = np.random.default_rng(seed)
    per_parameter: Dict[str, float] = {}
    worst = 0.0
    checked = 0
    for position, (parameter, grad) in enumerate(zip(parameters, analytic)):
        flat = parameter.data.reshape(-1)
        entries: List[int] = list(range(flat.size))
        if max_entries is not None and flat.size > max_entries:
            entries = sorted(rng.choice(flat.size, size=max_entries, replace=False).tolist())
        errors = []
        for entry in entries:
            original = flat[entry]
            flat[entry] = original + step
            upper = loss_fn().item()
            flat[entry] = original - step
            lower = loss_fn().item()
            flat[entry] = original
            numeric = (upper - lower) / (2.0 * step)
            errors.append(float(relative_error(grad.reshape(-1)[entry], np.asarray(numeric))))
        name = parameter.name or f"param{position}"
        per_parameter[name] = max(errors, default=0.0)
        worst = max(worst, per_parameter[name])
        checked += len(entries)
    return GradcheckResult(max_relative_error=worst, per_parameter=per_parameter, entries_checked=checked)
