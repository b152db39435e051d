"""Mode-u tensor-train factorizations of a third-order tensor.

A mode-u factorization stores the permuted tensor ``P = permute(A, u)`` of
dims ``(J1, J2, J3)`` in boundary-core form: every middle slice satisfies
``P[:, i, :] = X @ Y[i] @ Z`` with ``X`` of shape ``J1 x r1``, ``Y`` a stack
of ``J2`` cores of shape ``r1 x r2`` and ``Z`` of shape ``r2 x J3``.  The
multi-mode rank collects the three (r1, r2) pairs; each pair is a pair of
matricization ranks of the original tensor, assembled by
:meth:`MttRank.from_unfolding_ranks`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor

RankPair = tuple[int, int]


@dataclass(frozen=True)
class MttRank:
    """The three mode-u rank pairs (r1, r2), u = 1..3."""

    pairs: tuple[RankPair, RankPair, RankPair]

    def __post_init__(self):
        if len(self.pairs) != 3 or any(len(p) != 2 for p in self.pairs):
            raise ValueError("expected three (r1, r2) pairs")
        if any(r < 0 for p in self.pairs for r in p):
            raise ValueError("ranks must be nonnegative")

    def for_mode(self, u: int) -> RankPair:
        tensor.check_mode(u)
        return self.pairs[u - 1]

    @staticmethod
    def from_unfolding_ranks(r1: int, r2: int, r3: int) -> "MttRank":
        """Assemble the pairs from the three matricization ranks.

        Mode-1 pair is (rank of unfolding 3, rank of unfolding 2), mode-2 is
        (rank 1, rank 3) and mode-3 is (rank 2, rank 1).
        """
        return MttRank(((r3, r2), (r1, r3), (r2, r1)))


@dataclass
class MttFactor:
    """One mode-u factorization: matrix X, core stack Y (J2, r1, r2), matrix Z."""

    mode: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        tensor.check_mode(self.mode)
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        self.z = np.asarray(self.z, dtype=np.float64)
        if self.x.ndim != 2 or self.y.ndim != 3 or self.z.ndim != 2:
            raise ValueError("X and Z must be matrices and Y a stack of slices")
        j1, r1 = self.x.shape
        j2 = self.y.shape[0]
        r2, j3 = self.z.shape
        if self.y.shape[1:] != (r1, r2):
            raise ValueError(
                f"core stack of shape {self.y.shape} does not chain "
                f"X ({self.x.shape}) to Z ({self.z.shape})"
            )
        if r1 > min(j1, j2 * j3) or r2 > min(j3, j1 * j2):
            raise ValueError(f"ranks ({r1}, {r2}) exceed dims {(j1, j2, j3)}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.x.shape[0], self.y.shape[0], self.z.shape[1])

    @property
    def ranks(self) -> RankPair:
        return (self.x.shape[1], self.z.shape[0])


def reconstruct(f: MttFactor) -> np.ndarray:
    """Assemble the tensor whose mode-f.mode slices are X @ Y[i] @ Z."""
    p = np.einsum("ma,iab,bn->min", f.x, f.y, f.z, optimize=True)
    return tensor.ipermute(p, f.mode)


def _svd_sign_fixed(m: np.ndarray):
    """SVD with a deterministic sign convention.

    Each left singular vector is flipped so its largest-magnitude entry is
    nonnegative (first such entry on ties); the flip is mirrored on the
    right factor, keeping the product unchanged.
    """
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    pivot = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivot, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, s, vt * signs[:, None]


def tt_svd(a: np.ndarray, u: int, ranks: RankPair) -> MttFactor:
    """Two-step truncated SVD factorization of ``permute(a, u)``.

    The first SVD of the mode-1 unfolding of the permuted tensor yields X and
    a remainder; the remainder, reshaped to (r1*J2) x J3, is truncated again
    to produce the core stack Y and Z.  When (r1, r2) equal the exact
    mode-u ranks of ``a`` the reconstruction is exact to numerical precision,
    and in general the squared reconstruction error is bounded by the total
    squared mass of the discarded singular values.
    """
    p = np.ascontiguousarray(tensor.permute(a, u))
    j1, j2, j3 = p.shape
    r1, r2 = int(ranks[0]), int(ranks[1])
    if not 1 <= r1 <= min(j1, j2 * j3):
        raise ValueError(f"r1={r1} outside 1..{min(j1, j2 * j3)} for dims {(j1, j2, j3)}")
    if not 1 <= r2 <= min(r1 * j2, j3):
        raise ValueError(f"r2={r2} outside 1..{min(r1 * j2, j3)} for dims {(j1, j2, j3)}")

    u1, s1, v1t = _svd_sign_fixed(p.reshape(j1, j2 * j3, order="F"))
    x = u1[:, :r1]
    w = (s1[:r1, None] * v1t[:r1]).reshape(r1 * j2, j3, order="F")
    u2, s2, v2t = _svd_sign_fixed(w)
    y = u2[:, :r2].reshape(r1, j2, r2, order="F").transpose(1, 0, 2)
    z = s2[:r2, None] * v2t[:r2]
    return MttFactor(u, x, y, z)


def _unfolding_rank(m: np.ndarray, tol: float) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def mtt_rank(a: np.ndarray, tol: float = 1e-10) -> MttRank:
    """Numerical multi-mode rank at relative singular-value threshold ``tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    r = [_unfolding_rank(tensor.matricize(a, n), tol) for n in (1, 2, 3)]
    return MttRank.from_unfolding_ranks(*r)


def estimate_ranks(m: np.ndarray, energy: float) -> MttRank:
    """Smallest per-unfolding ranks capturing ``energy`` of squared singular mass.

    A plumbing heuristic for choosing initial ranks from the zero-filled
    observed tensor when no explicit rank triplet is supplied.
    """
    if not 0.0 < energy <= 1.0:
        raise ValueError(f"energy must lie in (0, 1], got {energy}")
    r = []
    for n in (1, 2, 3):
        s = np.linalg.svd(tensor.matricize(m, n), compute_uv=False)
        mass = np.cumsum(s * s)
        total = float(mass[-1]) if mass.size else 0.0
        if total <= 0.0:
            r.append(0)
        else:
            idx = int(np.searchsorted(mass, energy * total))
            r.append(min(idx, len(s) - 1) + 1)
    return MttRank.from_unfolding_ranks(*r)
