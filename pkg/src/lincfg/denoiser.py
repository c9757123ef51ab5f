"""Optimal linear denoiser for a Gaussian data model.

All operations work in the eigenbasis of the covariance: apply U^T, scale by
the per-direction shrinkage factor lam/(lam + sigma^2), apply U. The dense
inverse (Sigma + sigma^2 I)^-1 is never formed here; it exists only as a test
oracle.

Vector arguments accept shape (d,) or a batch (m, d); the result matches the
input shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .stats import GaussianStats


@dataclass(frozen=True)
class ShrinkageSpectrum:
    """Per-eigendirection attenuation factors lam_i/(lam_i + sigma^2)."""

    sigma: float
    factors: np.ndarray


def shrinkage(stats: GaussianStats, sigma: float, *,
              limit_zero_noise: bool = False) -> ShrinkageSpectrum:
    """Shrinkage factors at noise level sigma.

    With ``limit_zero_noise`` the sigma -> 0 limit is returned instead
    (factor 1 on the column space, 0 on the null space); this is the only way
    to reach sigma = 0, which the plain API excludes.
    """
    if limit_zero_noise:
        factors = (stats.eigvals > 0.0).astype(np.float64)
        return ShrinkageSpectrum(sigma=0.0, factors=factors)
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    lam = stats.eigvals
    return ShrinkageSpectrum(sigma=float(sigma), factors=lam / (lam + sigma * sigma))


def _check_dim(stats: GaussianStats, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != stats.d:
        raise ShapeError(f"vector dimension {x.shape[-1]} != stats dimension {stats.d}")
    return x


def denoise(stats: GaussianStats, x: np.ndarray, sigma: float) -> np.ndarray:
    """Posterior mean mu + U diag(f) U^T (x - mu) of the clean signal."""
    x = _check_dim(stats, x)
    f = shrinkage(stats, sigma).factors
    y = (x - stats.mean) @ stats.eigvecs
    return stats.mean + (y * f) @ stats.eigvecs.T


def score(stats: GaussianStats, x: np.ndarray, sigma: float) -> np.ndarray:
    """Score of the noise-mollified Gaussian: (denoise(x) - x) / sigma^2."""
    return (denoise(stats, x, sigma) - np.asarray(x, dtype=np.float64)) / (sigma * sigma)


def posterior_cov(stats: GaussianStats, sigma: float) -> np.ndarray:
    """Covariance of the clean signal given the noisy observation.

    Equals sigma^2 times the (constant) Jacobian of ``denoise``.
    """
    f = shrinkage(stats, sigma).factors
    U = stats.eigvecs
    return (sigma * sigma) * ((U * f) @ U.T)


def shrunk_covariance(stats: GaussianStats, sigma: float) -> np.ndarray:
    """U diag(f) U^T, the posterior covariance in shrinkage units (no sigma^2)."""
    f = shrinkage(stats, sigma).factors
    U = stats.eigvecs
    return (U * f) @ U.T
