"""Proximal alternating minimization for smooth tensor-train completion.

One outer iteration updates the completed tensor A by a circulant linear
solve in the 3D Fourier domain followed by projection onto the feasible set
(observed entries pinned, everything clamped to [0,1]), then refreshes each
mode's boundary factors X, Z by regularized least squares and the core stack
Y slice-by-slice through a pair of symmetric eigendecompositions. Every block
subproblem is strongly convex thanks to the proximal coefficient rho, which
is what drives the recorded objective downhill.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import tensor
from .dataio import ObservationMask
from .diffops import SmoothWeights, dw_apply, dw_spectrum
from .mtt import MttFactor, MttRank, reconstruct, tt_svd

INIT_FILLS = ("zero", "mean")


class SolverAbortError(RuntimeError):
    """An iterate went non-finite; the run cannot continue."""


@dataclass(frozen=True)
class SolverConfig:
    """Weights, regularization and loop controls for one solve."""

    alphas: tuple[float, float, float]
    smooth: SmoothWeights
    ranks: MttRank
    rho: float = 5e-6
    tol: float = 1e-6
    max_iter: int = 500
    init_fill: str = "zero"
    record_objective: bool = True

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if len(self.alphas) != 3 or any(a < 0 for a in self.alphas):
            raise ValueError("alphas must be three nonnegative weights")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.init_fill not in INIT_FILLS:
            raise ValueError(f"init_fill must be one of {INIT_FILLS}")

    def normalized(self) -> "SolverConfig":
        """Rescale the mode weights to sum to one.

        The Fourier-domain form of the A-step is derived under that
        normalization, so the solver applies it up front. All-zero weights
        leave no data-fit term and are rejected.
        """
        s = sum(self.alphas)
        if s <= 0:
            raise ValueError("at least one mode weight must be positive")
        return replace(self, alphas=tuple(a / s for a in self.alphas))


@dataclass
class FeasibleSet:
    """Observed entries pinned to the data, everything inside [0,1]."""

    mask: ObservationMask
    data: np.ndarray
    bounds: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        self.data = tensor.as_tensor3(self.data)
        if self.data.shape != self.mask.dims:
            raise ValueError("data and mask dims differ")
        lo, hi = self.bounds
        if not hi > lo:
            raise ValueError("empty bounds interval")
        seen = self.data[self.mask.observed]
        if seen.size and (seen.min() < lo - 1e-9 or seen.max() > hi + 1e-9):
            raise ValueError("observed values fall outside the bounds; normalize first")

    def project(self, a):
        """Clamp to the bounds, then overwrite observed entries with the data."""
        lo, hi = self.bounds
        out = np.clip(a, lo, hi)
        out[self.mask.observed] = self.data[self.mask.observed]
        return out


@dataclass
class SolveReport:
    """Final iterate plus the per-iteration evidence trail."""

    recovered: np.ndarray
    iterations: int
    converged: bool
    objective_history: list[float]
    fit_history: tuple[list[float], list[float], list[float]]
    stop_stat_history: list[float]
    step_sq_history: list[float]
    wall_time: float


@dataclass
class YUpdateWorkspace:
    """Eigendecompositions and right-hand sides for one core-stack update."""

    q1: np.ndarray
    lam1: np.ndarray
    q2: np.ndarray
    lam2: np.ndarray
    gammas: np.ndarray

    def __post_init__(self):
        for q in (self.q1, self.q2):
            r = q.shape[1]
            if not np.allclose(q.T @ q, np.eye(r), atol=1e-10):
                raise ValueError("eigenvector matrix is not orthogonal")
        if self.lam1.min(initial=0.0) < -1e-12 or self.lam2.min(initial=0.0) < -1e-12:
            raise ValueError("gram eigenvalues must be nonnegative")

    @classmethod
    def build(cls, f, a_perm, alpha, rho):
        lam1, q1 = np.linalg.eigh(f.x.T @ f.x)
        lam2, q2 = np.linalg.eigh(f.z @ f.z.T)
        gammas = alpha * np.einsum(
            "ma,min,bn->iab", f.x, a_perm, f.z, optimize=True
        ) + rho * f.y
        return cls(q1=q1, lam1=np.maximum(lam1, 0.0),
                   q2=q2, lam2=np.maximum(lam2, 0.0), gammas=gammas)


def objective(a, factors, cfg):
    """Evaluate the penalized objective and its four parts.

    Returns (total, (f1, f2, f3, g)) with f_u the weighted per-mode fit and
    g the smoothness term. The indicator of the feasible set is handled by
    projection elsewhere, so a feasible `a` contributes nothing here.
    """
    a = tensor.as_tensor3(a)
    fits = []
    for f, alpha in zip(factors, cfg.alphas):
        if f.mode not in (1, 2, 3):
            raise ValueError("factors must carry modes 1..3")
        rec = reconstruct(f)
        if rec.shape != a.shape:
            raise ValueError(f"mode-{f.mode} reconstruction shape {rec.shape} != {a.shape}")
        fits.append(0.5 * alpha * float(np.sum((a - rec) ** 2)))
    g = 0.5 * cfg.smooth.mu * sum(float(np.sum(d * d)) for d in dw_apply(a, cfg.smooth))
    return fits[0] + fits[1] + fits[2] + g, (fits[0], fits[1], fits[2], g)


def update_a(a_k, factors, cfg, feas, *, spectrum=None, project=True):
    """One tensor update: Fourier-domain linear solve, then projection.

    The normal equations of the A-subproblem are a constant plus the
    weighted periodic-difference gram operator, which the 3D DFT
    diagonalizes; the solve is an entrywise division by the real spectrum
    (1 + rho) + mu * spectrum. Pass `project=False` to inspect the
    unconstrained minimizer.
    """
    a_k = tensor.as_tensor3(a_k)
    if spectrum is None:
        spectrum = dw_spectrum(a_k.shape, cfg.smooth)
    rhs = cfg.rho * a_k
    for f, alpha in zip(factors, cfg.alphas):
        if alpha != 0.0:
            rhs = rhs + alpha * reconstruct(f)
    denom = (1.0 + cfg.rho) + cfg.smooth.mu * spectrum
    a_tilde = tensor.idft3(tensor.dft3(rhs) / denom).real
    if not project:
        return a_tilde
    return feas.project(a_tilde)


def update_x(f, a_perm, alpha, rho):
    """Closed-form boundary-matrix update against permuted-tensor slices.

    Minimizes (alpha/2) sum_i ||A_i - X Y_i Z||_F^2 + (rho/2) ||X - X_k||_F^2,
    whose gram system is positive definite for rho > 0.
    """
    if alpha == 0.0:
        return f.x.copy()
    b = np.einsum("iab,bn->ian", f.y, f.z)
    num = rho * f.x + alpha * np.einsum("min,ian->ma", a_perm, b)
    gram = rho * np.eye(b.shape[1]) + alpha * np.einsum("ian,icn->ac", b, b)
    return np.linalg.solve(gram, num.T).T


def update_z(f, a_perm, alpha, rho):
    """Mirror of the X update for the right boundary matrix.

    Expects `f` to carry the already-updated X and Y (the block order runs
    X, then Y, then Z within one iteration).
    """
    if alpha == 0.0:
        return f.z.copy()
    c = np.einsum("ma,iab->imb", f.x, f.y)
    gram = rho * np.eye(c.shape[2]) + alpha * np.einsum("imb,imc->bc", c, c)
    rhs = rho * f.z + alpha * np.einsum("imb,min->bn", c, a_perm)
    return np.linalg.solve(gram, rhs)


def update_y(f, a_perm, alpha, rho, workspace=None):
    """Per-slice core update via two symmetric eigendecompositions.

    Each slice solves (alpha * X^T X Y_i Z Z^T + rho Y_i) = Gamma_i; rotating
    into the eigenbases of the two gram matrices turns that into an
    entrywise division by rho + alpha * lam1 outer lam2. Expects the updated
    X and the not-yet-updated Z in `f`.
    """
    if alpha == 0.0:
        return f.y.copy()
    if workspace is None:
        workspace = YUpdateWorkspace.build(f, a_perm, alpha, rho)
    ghat = np.einsum("ak,iab,bl->ikl", workspace.q1, workspace.gammas,
                     workspace.q2, optimize=True)
    denom = rho + alpha * np.outer(workspace.lam1, workspace.lam2)
    yhat = ghat / denom
    return np.einsum("ak,ikl,bl->iab", workspace.q1, yhat, workspace.q2,
                     optimize=True)


def _initial_tensor(m, mask, cfg):
    if cfg.init_fill == "mean":
        seen = m[mask.observed]
        fill = float(seen.mean()) if seen.size else 0.0
    else:
        fill = 0.0
    return np.where(mask.observed, m, fill)


def _factor_step_sq(old, new):
    return (
        float(np.sum((new.x - old.x) ** 2))
        + float(np.sum((new.y - old.y) ** 2))
        + float(np.sum((new.z - old.z) ** 2))
    )


def solve(m, mask, cfg, callback=None):
    """Run the alternating loop until the iterate settles or the cap hits.

    `m` must already be normalized into [0,1] on its observed entries. The
    optional `callback(iteration, objective, stop_stat)` observes progress
    and must not mutate solver state; `objective` is None when
    cfg.record_objective is off.
    """
    cfg = cfg.normalized()
    m = tensor.as_tensor3(m)
    if m.shape != mask.dims:
        raise ValueError("data and mask dims differ")
    if mask.count == 0:
        raise ValueError("mask observes no entries; nothing to complete against")
    feas = FeasibleSet(mask=mask, data=m)

    a = _initial_tensor(m, mask, cfg)
    factors = [tt_svd(a, u, cfg.ranks.for_mode(u)) for u in (1, 2, 3)]
    spectrum = dw_spectrum(m.shape, cfg.smooth)
    denom = float(np.sqrt(np.sum(m[mask.observed] ** 2)))
    if denom == 0.0:
        denom = 1.0

    objective_history = []
    fit_history = ([], [], [])
    stop_stats = []
    step_sqs = []
    if cfg.record_objective:
        total, parts = objective(a, factors, cfg)
        objective_history.append(total)
        for u in range(3):
            fit_history[u].append(parts[u])

    started = time.perf_counter()
    iterations = 0
    converged = False
    for k in range(1, cfg.max_iter + 1):
        a_prev = a
        a = update_a(a_prev, factors, cfg, feas, spectrum=spectrum)
        if not np.isfinite(a).all():
            raise SolverAbortError(f"non-finite tensor iterate at iteration {k}")
        step_sq = float(np.sum((a - a_prev) ** 2))
        for idx, u in enumerate((1, 2, 3)):
            alpha = cfg.alphas[idx]
            if alpha == 0.0:
                continue
            old = factors[idx]
            a_perm = tensor.permute(a, u)
            x_new = update_x(old, a_perm, alpha, cfg.rho)
            f_x = MttFactor(mode=u, x=x_new, y=old.y, z=old.z)
            y_new = update_y(f_x, a_perm, alpha, cfg.rho)
            f_xy = MttFactor(mode=u, x=x_new, y=y_new, z=old.z)
            z_new = update_z(f_xy, a_perm, alpha, cfg.rho)
            new = MttFactor(mode=u, x=x_new, y=y_new, z=z_new)
            if not all(np.isfinite(arr).all() for arr in (new.x, new.y, new.z)):
                raise SolverAbortError(f"non-finite mode-{u} factor at iteration {k}")
            step_sq += _factor_step_sq(old, new)
            factors[idx] = new

        iterations = k
        stop_stat = float(np.sqrt(np.sum((a - a_prev) ** 2))) / denom
        stop_stats.append(stop_stat)
        step_sqs.append(step_sq)
        total = None
        if cfg.record_objective:
            total, parts = objective(a, factors, cfg)
            objective_history.append(total)
            for u in range(3):
                fit_history[u].append(parts[u])
        if callback is not None:
            callback(k, total, stop_stat)
        if stop_stat <= cfg.tol:
            converged = True
            break

    return SolveReport(
        recovered=a,
        iterations=iterations,
        converged=converged,
        objective_history=objective_history,
        fit_history=fit_history,
        stop_stat_history=stop_stats,
        step_sq_history=step_sqs,
        wall_time=time.perf_counter() - started,
    )
