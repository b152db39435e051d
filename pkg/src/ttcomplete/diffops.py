"""Periodic first-order difference operators on a tensor cube.

``diff`` takes circular forward differences along one of the three axes
(labelled ``h``, ``v``, ``t`` for modes 1, 2, 3).  The weighted stack of the
three operators drives the smoothness penalty; because the boundary wraps,
the normal operator ``dw_gram`` is diagonalized exactly by the 3D DFT, with
the eigenvalue field produced by :func:`dw_spectrum`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor

_AXIS_OF = {"h": 0, "v": 1, "t": 2}


@dataclass(frozen=True)
class SmoothWeights:
    """Direction weights (w1, w2, w3) and regularization strength mu, all >= 0."""

    w1: float = 1.0
    w2: float = 1.0
    w3: float = 1.0
    mu: float = 0.0

    def __post_init__(self):
        for name in ("w1", "w2", "w3", "mu"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def weights(self) -> tuple[float, float, float]:
        return (self.w1, self.w2, self.w3)


def _axis(axis: str) -> int:
    try:
        return _AXIS_OF[axis]
    except KeyError:
        raise ValueError(f"axis must be one of 'h', 'v', 't', got {axis!r}") from None


def diff(a: np.ndarray, axis: str) -> np.ndarray:
    """Circular forward difference: out(i) = a(i+1) - a(i), wrapping at the end."""
    a = tensor.as_tensor3(a)
    ax = _axis(axis)
    return np.roll(a, -1, axis=ax) - a


def diff_adjoint(b: np.ndarray, axis: str) -> np.ndarray:
    """Adjoint of :func:`diff` under the entrywise inner product.

    Equals the circular backward difference with flipped sign:
    out(i) = b(i-1) - b(i).
    """
    b = tensor.as_tensor3(b)
    ax = _axis(axis)
    return np.roll(b, 1, axis=ax) - b


def dw_apply(a: np.ndarray, sw: SmoothWeights) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weighted differences (w1*Dh a, w2*Dv a, w3*Dt a).

    The squared Frobenius norm of the stacked operator is the sum of the
    squared norms of the three parts.
    """
    return (
        sw.w1 * diff(a, "h"),
        sw.w2 * diff(a, "v"),
        sw.w3 * diff(a, "t"),
    )


def dw_gram(a: np.ndarray, sw: SmoothWeights) -> np.ndarray:
    """Normal operator of the weighted difference stack: sum_u w_u^2 * Du* Du a."""
    a = tensor.as_tensor3(a)
    out = np.zeros_like(a)
    for w, axis in zip(sw.weights, "hvt"):
        if w != 0.0:
            out += (w * w) * diff_adjoint(diff(a, axis), axis)
    return out


def dw_spectrum(dims: tuple[int, int, int], sw: SmoothWeights) -> np.ndarray:
    """Real eigenvalue field of ``dw_gram`` in the DFT basis.

    Entry (p, q, r) is sum_u w_u^2 * (2 - 2*cos(2*pi*k_u / I_u)) with k_u the
    frequency index along axis u, so that dft3(dw_gram(a)) = spectrum * dft3(a).
    All entries are >= 0 and the zero-frequency entry is 0.
    """
    parts = []
    for n in dims:
        k = np.arange(int(n))
        parts.append(2.0 - 2.0 * np.cos(2.0 * np.pi * k / int(n)))
    w1, w2, w3 = sw.weights
    return (
        w1 * w1 * parts[0][:, None, None]
        + w2 * w2 * parts[1][None, :, None]
        + w3 * w3 * parts[2][None, None, :]
    )
