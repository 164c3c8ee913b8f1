"""
Central finite-difference gradient checking.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass
class GradcheckResult:
    max_rel_error: float
    worst_input: int
    passed: bool


def gradcheck(
    fn: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    eps: float = 1e-5,
    rtol: float = 1e-4,
    floor: float = 1e-3,
    rng: Optional[np.random.Generator] = None,
) -> GradcheckResult:
    """
    Compare autograd against central differences for every input requiring grad.

    The output of ``fn`` is reduced to a scalar through a fixed random projection so
    that every output element contributes. Relative error per element is
    |analytic - numeric| / max(|analytic|, |numeric|, floor). Inputs should be float64.
    """
    rng = rng or np.random.default_rng(0)
    sample_out = fn(*inputs)
    projection = Tensor(rng.standard_normal(sample_out.shape), dtype=sample_out.dtype)

    def scalar() -> Tensor:
        return (fn(*inputs) * projection).sum()

    for t in inputs:
        t.zero_grad()
    scalar().backward()
    analytic: List[Optional[np.ndarray]] = [
        None if t.grad is None else t.grad.copy() for t in inputs
    ]

    worst, worst_input = 0.0, -1
    for i, t in enumerate(inputs):
        if not t.requires_grad:
            continue
        numeric = np.zeros_like(t.data)
        flat = t.data.reshape(-1)
        for j in range(flat.size):
            saved = flat[j]
            flat[j] = saved + eps
            plus = scalar().item()
            flat[j] = saved - eps
            minus = scalar().item()
            flat[j] = saved
            numeric.reshape(-1)[j] = (plus - minus) / (2 * eps)
        got = analytic[i] if analytic[i] is not None else np.zeros_like(numeric)
        denom = np.maximum(np.maximum(np.abs(got), np.abs(numeric)), floor)
        err = float(np.max(np.abs(got - numeric) / denom)) if numeric.size else 0.0
        if err > worst:
            worst, worst_input = err, i
    for t in inputs:
        t.zero_grad()
    logger.debug("gradcheck max relative error %.3e (input %d)", worst, worst_input)
    return GradcheckResult(max_rel_error=worst, worst_input=worst_input, passed=worst < rtol)
