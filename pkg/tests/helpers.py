"""Shared test oracles, primarily central finite differences.

The gradient checker perturbs every coordinate of the supplied arrays in
place, so the loss function must read the live arrays each call. Agreement is
judged per coordinate as |analytic - numeric| <= rtol*max(|a|,|n|) + atol;
the atol floor absorbs the O(eps^2) truncation noise of the central
difference at near-zero gradients.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

EPS = 1e-4
RTOL = 1e-4
ATOL = 1e-7


def finite_difference(f: Callable[[], float], arr: np.ndarray, eps: float = EPS) -> np.ndarray:
    grad = np.zeros_like(arr, dtype=np.float64)
    flat = arr.ravel()
    out = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f()
        flat[i] = orig - eps
        fm = f()
        flat[i] = orig
        out[i] = (fp - fm) / (2.0 * eps)
    return grad


def assert_grads_close(
    f: Callable[[], float],
    analytic: dict[str, np.ndarray],
    arrays: dict[str, np.ndarray],
    eps: float = EPS,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> None:
    """Check every named array's analytic gradient against central
    differences of f with respect to that array."""
    for name, arr in arrays.items():
        numeric = finite_difference(f, arr, eps=eps)
        a = analytic[name]
        bad = np.abs(a - numeric) > rtol * np.maximum(np.abs(a), np.abs(numeric)) + atol
        assert not bad.any(), (
            f"{name}: {int(bad.sum())} coords disagree; "
            f"worst analytic={a[bad].ravel()[0]!r} numeric={numeric[bad].ravel()[0]!r}"
        )
