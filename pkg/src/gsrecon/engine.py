"""Generalized sampling: the cross-Gram matrix, least-squares recovery and error functionals."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .sampling import SampleVector, SamplingScheme, fourier_matrix
from .wavelets import WaveletFamily, basis_values

log = logging.getLogger(__name__)

RANK_TOL = 1e-13
SVD_SWITCH = 1e-8


class IllPosedError(ArithmeticError):
    """The smallest singular value is below working precision."""

    def __init__(self, sigma_min: float, msg: str = ""):
        self.sigma_min = sigma_min
        super().__init__(msg or f"ill-posed below working precision (sigma_min={sigma_min:.3e})")


@dataclass(frozen=True)
class GsProblem:
    family: WaveletFamily
    scheme: SamplingScheme
    N: int
    M: int
    U: np.ndarray

    def rows(self, M: int) -> np.ndarray:
        """Rows of ``U`` for the nested sample set of size ``M <= self.M``."""
        if M > self.M:
            raise ValueError(f"problem assembled for M={self.M} < {M}")
        start = self.M // 2 - M // 2
        return self.U[start:start + M]


@dataclass(frozen=True)
class GsSolution:
    alpha: np.ndarray
    sigma_min: float
    residual: float
    method: str = "qr"

    @property
    def kappa(self) -> float:
        return math.inf if self.sigma_min == 0 else 1.0 / self.sigma_min


def assemble(family: WaveletFamily, scheme: SamplingScheme, N: int, M: int) -> GsProblem:
    """``U[i, j] = <phi_j, s_{l(i)}> = sqrt(eps) * basis_fourier(j, -2 pi eps l(i))``."""
    if N < 1 or M < 1:
        raise ValueError("N and M must be positive")
    scheme.check_family(family)
    U = math.sqrt(scheme.eps) * fourier_matrix(family, scheme.omegas(M), N)
    return GsProblem(family, scheme, N, M, np.asfortranarray(U))


def smallest_singular_value(U: np.ndarray) -> float:
    """Raw ``sigma_min`` of ``U``, exactly 0 when there are fewer rows than columns."""
    if U.shape[0] < U.shape[1]:
        return 0.0
    return float(sla.svdvals(U, check_finite=False)[-1])


def _sigma_min(U: np.ndarray) -> float:
    M, N = U.shape
    if M < N:
        return 0.0
    s = sla.svdvals(U, check_finite=False)
    if s[-1] <= RANK_TOL * s[0]:
        return 0.0
    return float(s[-1])


def c_nm(problem: GsProblem) -> float:
    """``C_{N,M}``: the smallest singular value of ``U`` (0 when rank deficient)."""
    return _sigma_min(problem.U)


def solve(problem: GsProblem, samples, allow_ill_posed: bool = False) -> GsSolution:
    """Least-squares coefficients ``argmin ||U alpha - samples||``.

    Column-pivoted QR is used when the problem is well conditioned and the SVD
    route below ``sigma_min = 1e-8``; the normal equations are never formed.

    Problems with ``sigma_min < 1e-13 * sigma_max`` raise :class:`IllPosedError`
    unless ``allow_ill_posed`` is set, in which case the minimum-norm SVD solution
    (LAPACK default cutoff) is returned with ``method="svd-ill-posed"``.  That path
    exists to measure instability, not to produce usable reconstructions.
    """
    y = np.asarray(samples.values if isinstance(samples, SampleVector) else samples, dtype=complex)
    U = problem.U
    if y.shape != (U.shape[0],):
        raise ValueError(f"expected {U.shape[0]} samples, got {y.shape}")
    if U.shape[0] < U.shape[1] and not allow_ill_posed:
        raise IllPosedError(0.0, f"fewer samples (M={U.shape[0]}) than unknowns (N={U.shape[1]})")
    s = sla.svdvals(U, check_finite=False)
    sigma = float(s[-1]) if U.shape[0] >= U.shape[1] else 0.0
    if sigma < RANK_TOL * s[0]:
        if not allow_ill_posed:
            raise IllPosedError(sigma)
        log.warning("solving ill-posed system (sigma_min=%.3e) by truncated SVD", sigma)
        alpha, *_ = sla.lstsq(U, y, lapack_driver="gelsd", check_finite=False)
        method = "svd-ill-posed"
    elif sigma < SVD_SWITCH:
        alpha, *_ = sla.lstsq(U, y, lapack_driver="gelsd", cond=RANK_TOL, check_finite=False)
        method = "svd"
    else:
        Q, R, piv = sla.qr(U, mode="economic", pivoting=True, check_finite=False)
        z = sla.solve_triangular(R, Q.conj().T @ y, check_finite=False)
        alpha = np.empty_like(z)
        alpha[piv] = z
        method = "qr"
    residual = float(np.linalg.norm(U @ alpha - y))
    return GsSolution(alpha, sigma, residual, method)


def reconstruction_error(beta, alpha, N: int | None = None) -> float:
    """``||f - f_tilde||`` for orthonormal expansions: coefficient mismatch plus the tail."""
    beta = np.asarray(beta)
    alpha = np.asarray(alpha)
    N = len(alpha) if N is None else N
    if len(beta) < N:
        beta = np.concatenate([beta, np.zeros(N - len(beta))])
    if len(alpha) < N:
        alpha = np.concatenate([alpha, np.zeros(N - len(alpha))])
    head = np.sum(np.abs(beta[:N] - alpha[:N]) ** 2)
    tail = np.sum(np.abs(beta[N:]) ** 2)
    return float(np.sqrt(head + tail))


def best_approx_error(beta, N: int) -> float:
    beta = np.asarray(beta)
    return float(np.sqrt(np.sum(np.abs(beta[N:]) ** 2)))


def evaluate_expansion(family: WaveletFamily, coeffs, x, levels: int = 14) -> np.ndarray:
    """Evaluate ``sum_p coeffs_p phi_p(x)`` at points ``x`` by dyadic interpolation."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    for p, c in enumerate(np.asarray(coeffs), start=1):
        if c != 0:
            out += c * basis_values(family, p, x, levels)
    return out
