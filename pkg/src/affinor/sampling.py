"""Deterministic sample-point generation for residual checks."""

from __future__ import annotations

import numpy as np

DEFAULT_POINTS = 50
DEFAULT_SEED = 24245


def sample_domain(domain, count: int = DEFAULT_POINTS, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Uniform points in a box, reproducible for a fixed seed."""
    if count < 1:
        raise ValueError("count must be positive")
    lo = np.array([a for a, _ in domain], dtype=float)
    hi = np.array([b for _, b in domain], dtype=float)
    if np.any(hi <= lo):
        raise ValueError("domain intervals must have positive length")
    rng = np.random.default_rng(seed)
    points = rng.uniform(lo, hi, size=(count, len(lo)))
    points.setflags(write=False)
    return points
