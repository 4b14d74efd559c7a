"""Real dense linear algebra used by the scheme constructions and audits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

DEFAULT_LADDER = (1e4, 1e6, 1e8, 1e10)


@dataclass(frozen=True)
class ChannelRealization:
    """The four N x M channel matrices; ``Hji`` maps Tx i to Rx j."""

    H11: np.ndarray
    H12: np.ndarray
    H21: np.ndarray
    H22: np.ndarray
    seed: Optional[int] = None

    def H(self, rx: int, tx: int) -> np.ndarray:
        return {(1, 1): self.H11, (1, 2): self.H12, (2, 1): self.H21, (2, 2): self.H22}[(rx, tx)]

    @property
    def shape(self) -> tuple[int, int]:
        return self.H11.shape

    @property
    def norm(self) -> float:
        """Largest absolute entry over the four matrices."""
        return max(float(np.max(np.abs(h))) for h in (self.H11, self.H12, self.H21, self.H22))


@dataclass(frozen=True)
class SlopeEstimate:
    slope: float
    ladder: tuple
    residual: float


def sample_channel(M: int, N: int, seed) -> ChannelRealization:
    """Draw four independent N x M matrices with i.i.d. standard normal entries."""
    if M < 1 or N < 1:
        raise ValueError("M and N must be positive")
    rng = np.random.default_rng(seed)
    mats = [rng.standard_normal((N, M)) for _ in range(4)]
    return ChannelRealization(*mats, seed=seed if isinstance(seed, int) else None)


def rank_tol(H: np.ndarray) -> float:
    return max(H.shape) * np.finfo(float).eps


def numeric_rank(H: np.ndarray, tol: Optional[float] = None) -> int:
    """Number of singular values above ``tol * sigma_max``."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if H.size == 0:
        return 0
    s = np.linalg.svd(H, compute_uv=False)
    if s[0] == 0.0:
        return 0
    tol = rank_tol(H) if tol is None else tol
    return int(np.sum(s > tol * s[0]))


def null_basis(H: np.ndarray, side: str = "right", tol: Optional[float] = None) -> np.ndarray:
    """Orthonormal basis of the null space of ``H``.

    ``side="right"`` returns B with ``H @ B = 0``; ``side="left"`` returns B
    with ``B.T @ H = 0``.  A trivial null space yields an array with zero
    columns.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if side == "left":
        H = H.T
    elif side != "right":
        raise ValueError("side must be 'right' or 'left'")
    n = H.shape[1]
    if H.shape[0] == 0:
        return np.eye(n)
    u, s, vt = np.linalg.svd(H)
    r = numeric_rank(H, tol)
    return vt[r:].T.copy()


def orth_basis(X: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """Orthonormal basis of the column space of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] == 0:
        return np.zeros((X.shape[0], 0))
    u, s, vt = np.linalg.svd(X, full_matrices=False)
    return u[:, : numeric_rank(X, tol)].copy()


def complement_in(sub: np.ndarray, space: np.ndarray) -> np.ndarray:
    """Orthonormal directions of span(space) orthogonal to span(sub).

    Both arguments are given as matrices whose columns span the subspaces.
    """
    space = orth_basis(space)
    if sub.shape[1] == 0:
        return space
    coords = space.T @ orth_basis(sub)  # sub expressed inside ``space``
    keep = null_basis(coords, side="left")
    return space @ keep


def gaussian_entropy(K: np.ndarray) -> float:
    """Differential entropy 0.5*log det(2*pi*e*K) of a real Gaussian vector, in nats."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    n = K.shape[0]
    if n == 0:
        return 0.0
    K = 0.5 * (K + K.T)
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not positive definite") from exc
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    return 0.5 * (n * np.log(2 * np.pi * np.e) + logdet)


def dof_slope(values: Sequence[tuple[float, float]]) -> SlopeEstimate:
    """Finite-power estimate of lim h / (0.5 log P) from (P, h) samples.

    The slope is taken from the two largest powers; the residual is the
    largest deviation of any consecutive-pair slope from it.
    """
    pts = [(float(P), float(h)) for P, h in values]
    if len(pts) < 2:
        raise ValueError("need at least two powers")
    Ps = [P for P, _ in pts]
    if any(b <= a for a, b in zip(Ps, Ps[1:])) or Ps[0] <= 0:
        raise ValueError("powers must be positive and strictly increasing")
    x = [0.5 * np.log(P) for P in Ps]
    h = [v for _, v in pts]
    pair = [(h[i + 1] - h[i]) / (x[i + 1] - x[i]) for i in range(len(pts) - 1)]
    slope = pair[-1]
    return SlopeEstimate(slope, tuple(Ps), max(abs(s - slope) for s in pair))


def ladder_entropies(cov_at: "callable", ladder: Iterable[float]) -> list[tuple[float, float]]:
    """Evaluate ``gaussian_entropy(cov_at(P))`` over a power ladder."""
    return [(P, gaussian_entropy(cov_at(P))) for P in ladder]
