"""Exact autoregressive sampling from a right-canonical MPS.

Conditionals come from the projected partial state P: with every site to the
right still right-isometric, the unnormalized probability of value n at site j
is || P @ T_j[:, n, :] ||^2. Sampling is exact, no burn-in.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError
from .mps import MPS, require_right_canonical
from .symmetric import SymmetricMPS

# conditional weights more negative than this are a numeric failure
NEGATIVE_TOL = -1e-12


@dataclass
class SampleBatch:
    configs: np.ndarray      # (n, L) integer configurations
    log_probs: np.ndarray | None = None


def _as_mps(model) -> MPS:
    return model.mps if isinstance(model, SymmetricMPS) else model


def _clamp(cond):
    if np.any(cond < NEGATIVE_TOL):
        raise ArithmeticError(
            f"conditional weight {cond.min():.3e} below roundoff tolerance")
    return np.maximum(cond, 0.0)


def perfect_sample(model, rng, auto_canonicalize=False) -> np.ndarray:
    """One exact draw from |Psi|^2. Requires a right-canonical model."""
    m = require_right_canonical(_as_mps(model), auto=auto_canonicalize)
    config = np.empty(m.length, dtype=np.int64)
    p = np.ones((1, 1))  # projected partial state, (1, bond)
    for j in range(m.length):
        amps = np.tensordot(p, m.tensors[j], axes=([1], [0]))[0]  # (d, right)
        cond = _clamp(np.einsum("dr,dr->d", amps, amps))
        total = cond.sum()
        if total <= 0.0:
            raise DegenerateStateError(f"all-zero conditional at site {j}")
        n = int(rng.choice(cond.size, p=cond / total))
        config[j] = n
        p = amps[None, n, :]
        norm = np.linalg.norm(p)
        if norm > 0:
            p = p / norm
    return config


def sample_batch(model, n, seed) -> SampleBatch:
    """n exact draws, vectorized across the batch; deterministic per seed.

    Draw i consumes row i of a pre-generated uniform table, so results do not
    depend on batch size beyond i or on evaluation order.
    """
    m = require_right_canonical(_as_mps(model), auto=True)
    L = m.length
    if n == 0:
        return SampleBatch(configs=np.empty((0, L), dtype=np.int64),
                           log_probs=np.empty(0))
    rng = np.random.default_rng(seed)
    uniforms = rng.random((int(n), L))
    configs = np.empty((int(n), L), dtype=np.int64)
    log_probs = np.zeros(int(n))
    p = np.ones((int(n), 1))
    for j in range(L):
        amps = np.einsum("nl,ldr->ndr", p, m.tensors[j])
        cond = _clamp(np.einsum("ndr,ndr->nd", amps, amps))
        totals = cond.sum(axis=1)
        if np.any(totals <= 0.0):
            raise DegenerateStateError(f"all-zero conditional at site {j}")
        probs = cond / totals[:, None]
        cum = np.cumsum(probs, axis=1)
        draws = (uniforms[:, j:j + 1] >= cum).sum(axis=1)
        draws = np.minimum(draws, cond.shape[1] - 1)
        configs[:, j] = draws
        log_probs += np.log(probs[np.arange(int(n)), draws])
        p = amps[np.arange(int(n)), draws, :]
        norms = np.linalg.norm(p, axis=1, keepdims=True)
        p = np.where(norms > 0, p / np.maximum(norms, 1e-300), p)
    return SampleBatch(configs=configs, log_probs=log_probs)
