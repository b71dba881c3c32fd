"""Spectral and clustering baselines for embedding quality.

All metrics except ``self_cluster`` work on the singular values (and left
singular vectors) of the column-centered embedding, so ``sigma**2`` is
proportional to the feature covariance spectrum. Each metric also has a
``*_from_singular_values`` form so it can be checked on prescribed spectra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import check_embedding
from .errors import AllZeroMatrix, DegenerateCloud, RankTooLow, ZeroNormRow

RANK_TOL = 1e-6
RANKME_EPS = 1e-7


@dataclass(frozen=True)
class SpectralSummary:
    singular_values: np.ndarray
    left_vectors: np.ndarray
    numerical_rank: int
    n: int

    @classmethod
    def from_embedding(cls, emb, center: bool = True) -> "SpectralSummary":
        x = check_embedding(emb)
        if center:
            x = x - x.mean(axis=0)
        u, s, _ = np.linalg.svd(x, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            raise AllZeroMatrix("all singular values are zero")
        r = numerical_rank(s)
        return cls(s, u[:, :r], r, x.shape[0])


def numerical_rank(s: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.asarray(s, dtype=np.float64)
    if s.size == 0 or s.max() == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s.max()))


def _spectrum(s) -> np.ndarray:
    s = np.sort(np.asarray(s, dtype=np.float64))[::-1]
    if s.size == 0 or s[0] <= 0.0:
        raise AllZeroMatrix("all singular values are zero")
    return s


def _summary(emb) -> SpectralSummary:
    if isinstance(emb, SpectralSummary):
        return emb
    x = check_embedding(emb)
    if x.shape[0] < 2:
        raise DegenerateCloud("spectral metrics need at least 2 rows")
    return SpectralSummary.from_embedding(x)


def rankme_from_singular_values(s, eps: float = RANKME_EPS) -> float:
    s = _spectrum(s)
    p = s / s.sum() + eps
    return float(np.exp(-np.sum(p * np.log(p))))


def rankme(emb) -> float:
    """Effective rank: exponential of the entropy of the normalized singular values."""
    return rankme_from_singular_values(_summary(emb).singular_values)


def alpha_req_from_singular_values(s) -> float:
    s = _spectrum(s)
    r = numerical_rank(s)
    if r < 3:
        raise RankTooLow(f"power-law fit needs numerical rank >= 3, got {r}")
    lam = s[:r] ** 2
    log_i = np.log(np.arange(1, r + 1))
    slope, _ = np.polyfit(log_i, np.log(lam), 1)
    return float(-slope)


def alpha_req(emb) -> float:
    """Decay exponent ``alpha`` of the covariance eigenvalues, ``lambda_i ~ i**-alpha``.

    Fitted by least squares in log-log space over the numerical rank.
    """
    return alpha_req_from_singular_values(_summary(emb).singular_values)


def nesum_from_eigenvalues(lam) -> float:
    lam = _spectrum(lam)
    return float(lam.sum() / lam[0])


def nesum(emb) -> float:
    """Sum of covariance eigenvalues normalized by the largest one."""
    s = _summary(emb).singular_values
    return nesum_from_eigenvalues(s**2)


def stable_rank_from_singular_values(s) -> float:
    s = _spectrum(s)
    return float(np.sum(s**2) / s[0] ** 2)


def stable_rank(emb) -> float:
    """Squared Frobenius norm over squared spectral norm.

    On the centered spectrum this coincides with ``nesum``.
    """
    return stable_rank_from_singular_values(_summary(emb).singular_values)


def mu0_incoherence(emb) -> float:
    """``(n / r) * max_i ||U_i||**2`` over the top-``r`` left singular vectors."""
    summary = _summary(emb)
    u = summary.left_vectors
    r = summary.numerical_rank
    return float(summary.n / r * np.max(np.einsum("ij,ij->i", u, u)))


def pc_number_from_singular_values(s) -> float:
    s = _spectrum(s)
    r = numerical_rank(s)
    return float(s[0] / s[r - 1])


def pc_number(emb) -> float:
    """Pseudo-condition number: largest over smallest retained singular value."""
    return pc_number_from_singular_values(_summary(emb).singular_values)


def self_cluster(emb) -> float:
    """Excess concentration of squared pairwise cosines over random directions.

    0 in expectation for isotropic clouds, 1 when every row is the same
    direction up to sign. Rows are normalized but not centered.
    """
    x = check_embedding(emb)
    n, d = x.shape
    if n < 2 or d < 2:
        raise DegenerateCloud(f"self_cluster needs n >= 2 and d >= 2, got {n}x{d}")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise ZeroNormRow(f"row {int(np.argmin(norms))} has zero norm")
    xn = x / norms[:, None]
    # sum_{i,j} cos^2 = ||Xn Xn^T||_F^2 = ||Xn^T Xn||_F^2; drop the n diagonal terms
    gram = xn.T @ xn
    off_diag = float(np.sum(gram * gram)) - n
    pairs = n * (n - 1)
    return (off_diag - pairs / d) / (pairs * (1.0 - 1.0 / d))


SPECTRAL_METRICS = {
    "rankme": rankme,
    "alpha_req": alpha_req,
    "nesum": nesum,
    "stable_rank": stable_rank,
    "mu0_incoherence": mu0_incoherence,
    "pc_number": pc_number,
}


def spectral_report(emb, names=None) -> dict[str, float]:
    """Compute several metrics sharing one SVD."""
    names = list(SPECTRAL_METRICS) + ["self_cluster"] if names is None else list(names)
    x = check_embedding(emb)
    summary = _summary(x) if any(n in SPECTRAL_METRICS for n in names) else None
    out = {}
    for name in names:
        if name == "self_cluster":
            out[name] = self_cluster(x)
        else:
            out[name] = SPECTRAL_METRICS[name](summary)
    return out
