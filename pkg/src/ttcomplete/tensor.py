"""Dense third-order tensor kernels.

A third-order tensor is a float64 :class:`numpy.ndarray` of shape
``(I1, I2, I3)``.  The canonical storage layout for serialization is
first-index-fastest (Fortran order): flat position ``i + I1*j + I1*I2*s``
holds entry ``(i, j, s)``.  In memory any strides are accepted; only the
file format in :mod:`ttcomplete.dataio` pins the byte layout.

Modes are labelled 1, 2, 3 and slice numbers are 1-based, following the
usual convention for mode-k slices of a tensor cube.
"""

from __future__ import annotations

import numpy as np

# Axis orders realizing the mode-u cyclic reindexing: the permuted tensor's
# middle axis is mode u of the original, i.e. A(i,j,s) lands at
# (s,i,j) for u=1, (i,j,s) for u=2 and (j,s,i) for u=3.
_PERM_AXES = {1: (2, 0, 1), 2: (0, 1, 2), 3: (1, 2, 0)}
_IPERM_AXES = {1: (1, 2, 0), 2: (0, 1, 2), 3: (2, 0, 1)}


def check_mode(k: int) -> int:
    if k not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {k!r}")
    return k


def as_tensor3(a, name: str = "tensor") -> np.ndarray:
    """Coerce to a float64 array of order 3."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 3:
        raise ValueError(f"{name} must have 3 axes, got shape {a.shape}")
    return a


def permute(a: np.ndarray, k: int) -> np.ndarray:
    """Mode-k permutation: the i-th middle (mode-2) slice of the result is
    the i-th mode-k slice of ``a``.

    Output dims are ``(I3, I1, I2)`` for k=1, unchanged for k=2 and
    ``(I2, I3, I1)`` for k=3.  Returns a view when possible.
    """
    a = as_tensor3(a)
    return np.transpose(a, _PERM_AXES[check_mode(k)])


def ipermute(b: np.ndarray, k: int) -> np.ndarray:
    """Inverse of :func:`permute`: ``ipermute(permute(a, k), k) == a`` exactly."""
    b = as_tensor3(b)
    return np.transpose(b, _IPERM_AXES[check_mode(k)])


def matricize(a: np.ndarray, n: int) -> np.ndarray:
    """Mode-n unfolding of shape ``I_n x (product of the other dims)``.

    Columns enumerate the remaining two indices with the lower-numbered
    mode varying fastest.  Only ranks and norms of the result are consumed
    downstream, both of which are invariant to the column order.
    """
    a = as_tensor3(a)
    check_mode(n)
    rest = [ax for ax in range(3) if ax != n - 1]
    moved = np.transpose(a, [n - 1] + rest)
    return moved.reshape(a.shape[n - 1], -1, order="F")


def mode_slice(a: np.ndarray, k: int, i: int) -> np.ndarray:
    """The i-th mode-k slice (1-based i), equal to middle slice i of ``permute(a, k)``.

    Shapes are I3 x I2 (k=1), I1 x I3 (k=2) and I2 x I1 (k=3).
    """
    a = as_tensor3(a)
    check_mode(k)
    size = a.shape[k - 1]
    if not 1 <= i <= size:
        raise IndexError(f"slice index {i} out of range 1..{size} for mode {k}")
    return permute(a, k)[:, i - 1, :]


def fro_norm(a: np.ndarray) -> float:
    """Frobenius norm: square root of the sum of squared entries."""
    return float(np.sqrt(np.sum(np.square(np.asarray(a, dtype=np.float64)))))


def l1_norm(a: np.ndarray) -> float:
    """Sum of absolute values of all entries."""
    return float(np.sum(np.abs(np.asarray(a, dtype=np.float64))))


def dft3(a: np.ndarray) -> np.ndarray:
    """Unnormalized forward 3D DFT along all three axes (any axis lengths)."""
    return np.fft.fftn(np.asarray(a))


def idft3(f: np.ndarray) -> np.ndarray:
    """Inverse 3D DFT carrying the 1/(I1*I2*I3) factor; inverts :func:`dft3`."""
    return np.fft.ifftn(np.asarray(f))
