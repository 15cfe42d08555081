"""Matrix product state container: amplitudes, norm, canonical forms, probability.

Every site tensor is a 3-leg array shaped (left_bond, physical, right_bond);
the chain boundaries are explicit dimension-1 bonds. Sites are 0-indexed.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CanonicalFormError, DegenerateStateError, ShapeError
from .tensor import RANK_CUTOFF, _fix_signs

ISOMETRY_TOL = 1e-8


@dataclass
class MPS:
    tensors: list[np.ndarray]
    canonical_center: int | None = None

    def __post_init__(self):
        self.tensors = [np.asarray(t, dtype=np.float64) for t in self.tensors]
        self.validate()

    # -- structure ---------------------------------------------------------

    @property
    def length(self) -> int:
        return len(self.tensors)

    @property
    def physical_dims(self) -> list[int]:
        return [t.shape[1] for t in self.tensors]

    @property
    def bond_dims(self) -> list[int]:
        return [self.tensors[0].shape[0]] + [t.shape[2] for t in self.tensors]

    def validate(self):
        if not self.tensors:
            raise ShapeError("MPS needs at least one site")
        for j, t in enumerate(self.tensors):
            if t.ndim != 3:
                raise ShapeError(f"site {j} tensor is not 3-leg: shape {t.shape}")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ShapeError("boundary bonds must have dimension 1")
        for j in range(self.length - 1):
            if self.tensors[j].shape[2] != self.tensors[j + 1].shape[0]:
                raise ShapeError(
                    f"bond mismatch between sites {j} and {j + 1}: "
                    f"{self.tensors[j].shape[2]} != {self.tensors[j + 1].shape[0]}")
        if self.canonical_center is not None and not (
                0 <= self.canonical_center < self.length):
            raise ShapeError(f"canonical_center {self.canonical_center} out of range")

    def copy(self) -> "MPS":
        return MPS([t.copy() for t in self.tensors], self.canonical_center)

    # -- evaluation --------------------------------------------------------

    def amplitude(self, config) -> float:
        config = np.asarray(config, dtype=np.int64)
        if config.shape != (self.length,):
            raise ShapeError(f"config length {config.size} != {self.length}")
        for j, (n, d) in enumerate(zip(config, self.physical_dims)):
            if not 0 <= n < d:
                raise ShapeError(f"physical index {n} out of range at site {j}")
        v = self.tensors[0][:, config[0], :]
        for j in range(1, self.length):
            v = v @ self.tensors[j][:, config[j], :]
        return float(v[0, 0])

    def amplitudes(self, configs) -> np.ndarray:
        """Batched amplitude evaluation for an (n_samples, L) index array."""
        configs = np.asarray(configs, dtype=np.int64)
        v = self.tensors[0][:, configs[:, 0], :].transpose(1, 0, 2)[:, 0, :]
        for j in range(1, self.length):
            a = self.tensors[j][:, configs[:, j], :].transpose(1, 0, 2)
            v = np.einsum("nl,nlr->nr", v, a)
        return v[:, 0]

    def norm_squared(self) -> float:
        """Z = sum_x Psi(x)^2 via the transfer-matrix contraction."""
        e = np.tensordot(self.tensors[0], self.tensors[0], axes=([0, 1], [0, 1]))
        for j in range(1, self.length):
            t = self.tensors[j]
            e = np.tensordot(e, t, axes=([0], [0]))
            e = np.tensordot(e, t, axes=([0, 1], [0, 1]))
        return float(e[0, 0])

    def probability(self, config) -> float:
        z = self.norm_squared()
        if z <= 0.0:
            raise DegenerateStateError("zero-norm MPS has no probabilities")
        return self.amplitude(config) ** 2 / z

    # -- canonical form ----------------------------------------------------

    def is_left_isometric(self, j, tol=ISOMETRY_TOL) -> bool:
        t = self.tensors[j]
        m = t.reshape(-1, t.shape[2])
        return bool(np.allclose(m.T @ m, np.eye(t.shape[2]), atol=tol))

    def is_right_isometric(self, j, tol=ISOMETRY_TOL) -> bool:
        t = self.tensors[j]
        m = t.reshape(t.shape[0], -1)
        return bool(np.allclose(m @ m.T, np.eye(t.shape[0]), atol=tol))

    def check_canonical(self, tol=ISOMETRY_TOL) -> bool:
        c = self.canonical_center
        if c is None:
            return False
        ok = all(self.is_left_isometric(j, tol) for j in range(c))
        ok = ok and all(self.is_right_isometric(j, tol)
                        for j in range(c + 1, self.length))
        return ok and abs(self.norm_squared() - 1.0) < tol

    def right_canonicalize(self, max_bond=None, method="svd") -> "MPS":
        """Return an equivalent normalized MPS with canonical center at site 0.

        Sweeps pairwise contraction + SVD (or QR) from the last site to the
        first; the global scale is discarded.
        """
        tensors = [t.copy() for t in self.tensors]
        for j in range(self.length - 1, 0, -1):
            t = tensors[j]
            l, d, r = t.shape
            m = t.reshape(l, d * r)
            if method == "qr":
                q, rest = np.linalg.qr(m.T, mode="reduced")
                q, rest = _fix_signs(q, rest)
                b, carry = q.T, rest.T
            else:
                u, s, vt = np.linalg.svd(m, full_matrices=False)
                if s[0] <= 0.0:
                    raise DegenerateStateError("zero-norm MPS cannot be canonicalized")
                rank = int(np.count_nonzero(s > RANK_CUTOFF * s[0]))
                k = max(1, rank)
                if max_bond is not None:
                    k = min(k, int(max_bond))
                u, s, vt = u[:, :k], s[:k], vt[:k, :]
                u, vt = _fix_signs(u, vt)
                b, carry = vt, u * s
            tensors[j] = b.reshape(b.shape[0], d, r)
            tensors[j - 1] = np.tensordot(tensors[j - 1], carry, axes=([2], [0]))
        norm = np.linalg.norm(tensors[0])
        if norm <= 0.0 or not np.isfinite(norm):
            raise DegenerateStateError("zero-norm MPS cannot be normalized")
        tensors[0] = tensors[0] / norm
        return MPS(tensors, canonical_center=0)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "physical_dims": self.physical_dims,
            "bond_dims": self.bond_dims,
            "tensors": [t.ravel().tolist() for t in self.tensors],
            "canonical_center": self.canonical_center,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MPS":
        dims = doc["physical_dims"]
        bonds = doc["bond_dims"]
        tensors = [
            np.asarray(flat, dtype=np.float64).reshape(bonds[j], dims[j], bonds[j + 1])
            for j, flat in enumerate(doc["tensors"])
        ]
        return cls(tensors, doc.get("canonical_center"))

    def save_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load_json(cls, path) -> "MPS":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def enumerate_configs(physical_dims):
    """All configurations of the given physical dimensions, lexicographic order."""
    return itertools.product(*(range(d) for d in physical_dims))


def product_state(config, physical_dims) -> MPS:
    """MPS with amplitude 1 on `config` and 0 elsewhere."""
    tensors = []
    for n, d in zip(config, physical_dims):
        t = np.zeros((1, d, 1))
        t[0, n, 0] = 1.0
        tensors.append(t)
    return MPS(tensors, canonical_center=0)


def random_mps(physical_dims, bond_dim, rng) -> MPS:
    """Random MPS with entries uniform on [0, 1), bonds capped by the exact bound."""
    L = len(physical_dims)
    bonds = [1]
    for j in range(1, L):
        left = int(np.prod(physical_dims[:j], dtype=np.float64).clip(max=2**62))
        right = int(np.prod(physical_dims[j:], dtype=np.float64).clip(max=2**62))
        bonds.append(min(int(bond_dim), left, right))
    bonds.append(1)
    tensors = [rng.random((bonds[j], physical_dims[j], bonds[j + 1]))
               for j in range(L)]
    return MPS(tensors)


def require_right_canonical(m: MPS, auto=False) -> MPS:
    if m.canonical_center == 0:
        return m
    if auto:
        return m.right_canonicalize()
    raise CanonicalFormError("MPS must be right-canonical (center at site 0)")
