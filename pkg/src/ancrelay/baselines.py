"""Memoryless relay schemes: symbol-wise MMSE, amplify-and-forward, MRC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jointbp import init_evidence, pair_constellation


@dataclass(eq=False)
class BaselineOutput:
    x3: np.ndarray
    scheme: str
    gain: float | None = None


def memoryless_mmse(r, h13, h23, sigma2):
    """Symbol-by-symbol posterior mean of h13*(1-2*x1) + h23*(1-2*x2).

    Works on a scalar sample or a whole packet; each output lies in the
    convex hull of the four superimposed constellation points.
    """
    p = init_evidence(r, h13, h23, sigma2)
    return p @ pair_constellation(h13, h23)


def amplify_forward(r, h13, h23, sigma2) -> BaselineOutput:
    """Scale the received packet to unit average output power and forward it."""
    alpha = 1.0 / np.sqrt(abs(h13) ** 2 + abs(h23) ** 2 + sigma2)
    return BaselineOutput(x3=alpha * np.asarray(r), scheme="amplify_forward", gain=alpha)


def mrc_repeat_combine(r, q: int, sigma2: float):
    """Average each group of q repeated observations.

    Groups are consecutive blocks of q positions, matching the repeat
    structure of the (1, q) parity-check construction in this package.
    Returns the combined packet of length n/q and its effective noise
    variance sigma2/q.
    """
    r = np.asarray(r)
    if q < 1 or r.shape[-1] % q != 0:
        raise ValueError(f"repeat factor {q} must divide packet length {r.shape[-1]}")
    combined = r.reshape(-1, q).mean(axis=1)
    return combined, sigma2 / q
