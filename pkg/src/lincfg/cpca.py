"""Contrastive principal components: signed eigendecomposition of covariance
differences.

Positive eigenvalues mark directions with more target variance, negative ones
directions dominated by the background set. Eigenvalues within tolerance of
zero belong to neither group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .denoiser import shrunk_covariance
from .errors import ShapeError
from .stats import GaussianStats, fix_eigvec_signs

_ZERO_TOL_SCALE = 1e-10


@dataclass(frozen=True)
class SignedSpectrum:
    """Eigenpairs of a symmetric difference matrix, sorted descending."""

    eigvals: np.ndarray
    eigvecs: np.ndarray
    n_pos: int

    @property
    def n_neg(self) -> int:
        tol = _ZERO_TOL_SCALE * max(1.0, abs(float(self.eigvals[0]))) if self.eigvals.size else 0.0
        return int(np.sum(self.eigvals < -tol))

    @property
    def positive(self) -> tuple[np.ndarray, np.ndarray]:
        """(eigvals, eigvecs) of the positive part; vecs are columns."""
        return self.eigvals[:self.n_pos], self.eigvecs[:, :self.n_pos]

    @property
    def negative(self) -> tuple[np.ndarray, np.ndarray]:
        """(eigvals, eigvecs) of the negative part, still descending order."""
        n = self.n_neg
        if n == 0:
            return self.eigvals[:0], self.eigvecs[:, :0]
        return self.eigvals[-n:], self.eigvecs[:, -n:]


def contrastive_components(A: np.ndarray, B: np.ndarray, *,
                           sym_tol: float = 1e-8) -> SignedSpectrum:
    """Signed eigendecomposition of A - B for symmetric A, B.

    Inputs are symmetrized before decomposition to absorb round-off; genuine
    asymmetry beyond ``sym_tol`` (relative to the largest entry) is rejected.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"A must be square, got {A.shape}")
    if B.shape != A.shape:
        raise ShapeError(f"B shape {B.shape} != A shape {A.shape}")
    for name, M in (("A", A), ("B", B)):
        scale = max(1.0, float(np.max(np.abs(M))))
        asym = float(np.max(np.abs(M - M.T)))
        if asym > sym_tol * scale:
            raise ValueError(f"{name} is asymmetric beyond tolerance: {asym:.3e}")
    diff = 0.5 * (A + A.T) - 0.5 * (B + B.T)
    lam, V = np.linalg.eigh(diff)
    lam = lam[::-1].copy()
    V = fix_eigvec_signs(V[:, ::-1])
    tol = _ZERO_TOL_SCALE * max(1.0, abs(float(lam[0])))
    return SignedSpectrum(eigvals=lam, eigvecs=V, n_pos=int(np.sum(lam > tol)))


def posterior_cpcs(cond: GaussianStats, uncond: GaussianStats,
                   sigma: float) -> SignedSpectrum:
    """CPCs of the conditional vs unconditional posterior covariances at sigma.

    The posterior covariances share the factor sigma^2, which cancels in the
    contrast; eigenvalues are therefore reported in shrinkage units.
    """
    if cond.d != uncond.d:
        raise ShapeError(f"stats dims differ: {cond.d} != {uncond.d}")
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return contrastive_components(shrunk_covariance(cond, sigma),
                                  shrunk_covariance(uncond, sigma))


def variance_along(stats: GaussianStats, v: np.ndarray) -> float:
    """v^T Sigma v for a unit vector v, evaluated in the eigenbasis."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] != stats.d:
        raise ShapeError(f"direction dimension {v.shape[0]} != stats dimension {stats.d}")
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"direction must be a unit vector, |v| = {nrm}")
    y = stats.eigvecs.T @ v
    return float(np.sum(stats.eigvals * y * y))


def cpc_drift_angles(cond: GaussianStats, uncond: GaussianStats,
                     sigmas: np.ndarray, k: int = 1) -> np.ndarray:
    """Principal angles (radians) between the top-k CPC subspace at each sigma
    and the sigma-free CPCs of Sigma_c - Sigma_uc.

    Diagnostic only: how far the noise-dependent CPCs drift from the raw
    covariance contrast carries no asserted bound.
    """
    base = contrastive_components(cond.covariance(), uncond.covariance())
    _, vb = base.positive
    k = min(k, vb.shape[1])
    if k == 0:
        return np.zeros(len(sigmas))
    out = np.empty(len(sigmas))
    for i, s in enumerate(np.asarray(sigmas, dtype=np.float64)):
        spec = posterior_cpcs(cond, uncond, float(s))
        _, vs = spec.positive
        kk = min(k, vs.shape[1])
        if kk == 0:
            out[i] = np.pi / 2
            continue
        sv = np.linalg.svd(vb[:, :k].T @ vs[:, :kk], compute_uv=False)
        out[i] = float(np.arccos(np.clip(sv.min(), -1.0, 1.0)))
    return out
