"""U(1)-symmetric MPS: charge bookkeeping, constraint-state construction,
symmetry checks, and the block-wise SVD that keeps the charge structure exact.

Charge convention: every bond index carries an integer charge label and every
site may inject a flux on its left (the incoming quantum number of its
constraint segment). An entry T[kl, n, kr] is admissible iff

    charge(kl) + flux == charge(n) + charge(kr)

which for flux 0 is the per-site conservation law left = physical + right.
Inter-segment bonds have dimension 1 and charge 0; the segment's quantum
number enters as the flux of its first site.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, ShapeError, SymmetryError
from .mps import MPS
from .tensor import RANK_CUTOFF, _fix_signs

SYMMETRY_TOL = 1e-10


@dataclass
class ChargeStructure:
    bond_charges: list[list[int]]      # L + 1 entries, one label per bond index
    physical_charges: list[list[int]]  # per site, one label per physical index
    site_flux: list[int]               # charge injected on the left of each site
    segment_charges: list[int]         # incoming quantum number b per segment

    @property
    def n_sites(self) -> int:
        return len(self.physical_charges)

    def validate_against(self, m: MPS):
        if self.n_sites != m.length or len(self.bond_charges) != m.length + 1:
            raise ShapeError("charge structure does not match MPS length")
        for j in range(m.length):
            l, d, r = m.tensors[j].shape
            if (len(self.bond_charges[j]) != l or len(self.physical_charges[j]) != d
                    or len(self.bond_charges[j + 1]) != r):
                raise ShapeError(f"charge labels do not match tensor shape at site {j}")

    def site_mask(self, j) -> np.ndarray:
        """Boolean (left, phys, right) array of charge-admissible entries."""
        left = np.asarray(self.bond_charges[j])[:, None, None]
        phys = np.asarray(self.physical_charges[j])[None, :, None]
        right = np.asarray(self.bond_charges[j + 1])[None, None, :]
        return left + self.site_flux[j] == phys + right

    def split_charges(self, i):
        """Row/column charges of the merged (i, i+1) tensor, matricized as
        rows (k_{i-1}, n_i) and columns (n_{i+1}, k_{i+1}), both row-major.

        A row/column pair can be nonzero only when its labels agree; the label
        is the charge carried by the new bond between the two sites.
        """
        left = np.asarray(self.bond_charges[i])
        p0 = np.asarray(self.physical_charges[i])
        p1 = np.asarray(self.physical_charges[i + 1])
        right = np.asarray(self.bond_charges[i + 2])
        row = (left[:, None] + self.site_flux[i] - p0[None, :]).ravel()
        col = (p1[:, None] + right[None, :] - self.site_flux[i + 1]).ravel()
        return row, col

    def to_json_dict(self) -> dict:
        return {
            "bond_charges": self.bond_charges,
            "physical_charges": self.physical_charges,
            "site_flux": self.site_flux,
            "segment_charges": self.segment_charges,
        }

    @classmethod
    def from_json_dict(cls, doc) -> "ChargeStructure":
        return cls(
            bond_charges=[list(map(int, b)) for b in doc["bond_charges"]],
            physical_charges=[list(map(int, p)) for p in doc["physical_charges"]],
            site_flux=list(map(int, doc["site_flux"])),
            segment_charges=list(map(int, doc["segment_charges"])),
        )


@dataclass
class SymmetricMPS:
    mps: MPS
    charges: ChargeStructure

    def __post_init__(self):
        self.charges.validate_against(self.mps)

    @property
    def length(self) -> int:
        return self.mps.length

    def amplitude(self, config) -> float:
        return self.mps.amplitude(config)

    def copy(self) -> "SymmetricMPS":
        return SymmetricMPS(
            self.mps.copy(),
            ChargeStructure(
                [list(b) for b in self.charges.bond_charges],
                [list(p) for p in self.charges.physical_charges],
                list(self.charges.site_flux),
                list(self.charges.segment_charges),
            ))

    def to_json_dict(self) -> dict:
        doc = self.mps.to_json_dict()
        doc["charges"] = self.charges.to_json_dict()
        return doc

    @classmethod
    def from_json_dict(cls, doc) -> "SymmetricMPS":
        return cls(MPS.from_json_dict(doc),
                   ChargeStructure.from_json_dict(doc["charges"]))

    def save_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load_json(cls, path) -> "SymmetricMPS":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def symmetry_defect(s: SymmetricMPS) -> float:
    """Largest |entry| sitting on a charge-forbidden index combination."""
    worst = 0.0
    for j in range(s.length):
        forbidden = ~s.charges.site_mask(j)
        if forbidden.any():
            worst = max(worst, float(np.abs(s.mps.tensors[j][forbidden]).max()))
    return worst


@dataclass
class BlockSvdResult:
    u: np.ndarray
    singular_values: np.ndarray    # raw (not renormalized), non-increasing
    vt: np.ndarray
    bond_charges: list[int]        # charge label of each kept singular vector
    truncation_error: float


def block_svd(matrix, row_charges, col_charges, chi=None,
              tol=SYMMETRY_TOL) -> BlockSvdResult:
    """SVD performed independently inside each charge block.

    Truncation keeps the globally largest `chi` singular values, except that a
    charge sector with nonzero spectrum is never emptied while another sector
    holds more than one slot (emptying a sector would disconnect the feasible
    support it carries).
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError("block_svd expects a 2-leg input")
    row_charges = np.asarray(row_charges)
    col_charges = np.asarray(col_charges)
    if row_charges.size != m.shape[0] or col_charges.size != m.shape[1]:
        raise ShapeError("charge labels do not match matrix shape")

    off = row_charges[:, None] != col_charges[None, :]
    if off.any():
        worst = float(np.abs(m[off]).max())
        if worst > tol:
            raise SymmetryError(
                f"input violates charge symmetry: off-block entry {worst:.3e}")

    sectors = sorted(set(row_charges.tolist()) & set(col_charges.tolist()))
    pieces = []  # (value, sector, column-within-sector, u_block, vt_block, rows, cols)
    for q in sectors:
        rows = np.flatnonzero(row_charges == q)
        cols = np.flatnonzero(col_charges == q)
        u, s, vt = np.linalg.svd(m[np.ix_(rows, cols)], full_matrices=False)
        u, vt = _fix_signs(u, vt)
        smax = s[0] if s.size else 0.0
        for idx in range(s.size):
            if s[idx] > max(RANK_CUTOFF * smax, 0.0) and s[idx] > 0.0:
                pieces.append((float(s[idx]), q, idx, u, vt, rows, cols))

    if not pieces:
        raise DegenerateStateError("block_svd of a zero matrix")

    order = sorted(range(len(pieces)), key=lambda i: (-pieces[i][0], pieces[i][1]))
    k = len(order) if chi is None else min(int(chi), len(order))
    kept = order[:k]

    # keep every populated sector alive if the budget allows
    kept_sectors = {pieces[i][1] for i in kept}
    missing = [q for q in sectors
               if q not in kept_sectors and any(p[1] == q for p in pieces)]
    for q in missing:
        counts = {}
        for i in kept:
            counts[pieces[i][1]] = counts.get(pieces[i][1], 0) + 1
        donor_sector = max(counts, key=lambda s_: (counts[s_],))
        if counts[donor_sector] <= 1:
            break
        drop = min((i for i in kept if pieces[i][1] == donor_sector),
                   key=lambda i: pieces[i][0])
        add = max((i for i in range(len(pieces)) if pieces[i][1] == q),
                  key=lambda i: pieces[i][0])
        kept[kept.index(drop)] = add
        kept.sort(key=lambda i: (-pieces[i][0], pieces[i][1]))

    kept_vals = np.array([pieces[i][0] for i in kept])
    discarded = [p[0] for i, p in enumerate(pieces) if i not in set(kept)]
    err = float(np.sqrt(np.sum(np.square(discarded)))) if discarded else 0.0

    u_out = np.zeros((m.shape[0], len(kept)))
    vt_out = np.zeros((len(kept), m.shape[1]))
    charges_out = []
    for col, i in enumerate(kept):
        _, q, idx, u, vt, rows, cols = pieces[i]
        u_out[rows, col] = u[:, idx]
        vt_out[col, cols] = vt[idx, :]
        charges_out.append(int(q))
    return BlockSvdResult(u=u_out, singular_values=kept_vals, vt=vt_out,
                          bond_charges=charges_out, truncation_error=err)


def right_canonicalize_symmetric(s: SymmetricMPS, max_bond=None) -> SymmetricMPS:
    """Right-canonicalize with block-wise SVDs so the symmetry stays exact."""
    out = s.copy()
    tensors = out.mps.tensors
    ch = out.charges
    for j in range(out.length - 1, 0, -1):
        l, d, r = tensors[j].shape
        m = tensors[j].reshape(l, d * r)
        row_q = np.asarray(ch.bond_charges[j])
        phys = np.asarray(ch.physical_charges[j])
        right = np.asarray(ch.bond_charges[j + 1])
        col_q = (phys[:, None] + right[None, :] - ch.site_flux[j]).ravel()
        res = block_svd(m, row_q, col_q, chi=max_bond)
        k = res.singular_values.size
        tensors[j] = res.vt.reshape(k, d, r)
        carry = res.u * res.singular_values
        tensors[j - 1] = np.tensordot(tensors[j - 1], carry, axes=([2], [0]))
        ch.bond_charges[j] = res.bond_charges
    norm = np.linalg.norm(tensors[0])
    if norm <= 0.0:
        raise DegenerateStateError("zero-norm symmetric MPS")
    tensors[0] = tensors[0] / norm
    out.mps.canonical_center = 0
    return out


def build_assignment_mps(n_objects: int, n_knapsacks: int) -> SymmetricMPS:
    """Constraint state for one-hot object-to-knapsack assignment.

    N segments of M binary sites; each segment carries incoming charge 1, so
    only configurations with exactly one 1 per segment have nonzero amplitude.
    Admissible entries start at 1, then the state is right-canonicalized,
    which makes sampling uniform over the feasible strings.
    """
    if n_objects < 1 or n_knapsacks < 2:
        raise ShapeError("need n_objects >= 1 and n_knapsacks >= 2")
    N, M = n_objects, n_knapsacks
    L = N * M
    bond_charges: list[list[int]] = [[0]]
    site_flux = []
    for i in range(N):
        for j in range(M):
            site_flux.append(1 if j == 0 else 0)
            bond_charges.append([0] if j == M - 1 else [0, 1])
    charges = ChargeStructure(
        bond_charges=bond_charges,
        physical_charges=[[0, 1] for _ in range(L)],
        site_flux=site_flux,
        segment_charges=[1] * N,
    )
    tensors = []
    for j in range(L):
        shape = (len(bond_charges[j]), 2, len(bond_charges[j + 1]))
        t = np.zeros(shape)
        mask = ChargeStructure(
            bond_charges[j:j + 2], [[0, 1]], [site_flux[j]], []).site_mask(0)
        t[mask] = 1.0
        tensors.append(t)
    state = SymmetricMPS(MPS(tensors), charges)
    return right_canonicalize_symmetric(state)
