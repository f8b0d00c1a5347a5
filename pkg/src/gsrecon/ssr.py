"""Stable sampling rate search, curves, and the sub-critical instability experiment."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .engine import RANK_TOL, assemble, smallest_singular_value
from .sampling import SamplingScheme
from .wavelets import WaveletFamily, n_r, scaling_fourier

log = logging.getLogger(__name__)

# relative slack on theta so that 1/C == theta at an analytic threshold counts as stable
THETA_SLACK = 1e-9


class SsrCapError(RuntimeError):
    def __init__(self, N: int, cap: int, best_c: float):
        self.N, self.cap, self.best_c = N, cap, best_c
        super().__init__(
            f"SSR exceeds cap: no M <= {cap} gives 1/C < theta for N={N} (best C={best_c:.6g})"
        )


@dataclass(frozen=True)
class SsrQuery:
    family: WaveletFamily
    scheme: SamplingScheme
    theta: float
    N: int
    search_cap: int = 0

    def __post_init__(self):
        if not self.theta > 1:
            raise ValueError("theta must exceed 1")
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.search_cap == 0:
            object.__setattr__(self, "search_cap", 16 * self.N)
        if self.search_cap < self.N:
            raise ValueError("search_cap must be >= N")


@dataclass(frozen=True)
class SsrResult:
    N: int
    M_star: int
    sigma_min: float
    evaluations: int


@dataclass
class SsrCurve:
    theta: float
    epsilon: float
    family: str
    points: list = field(default_factory=list)  # SsrResult entries

    @property
    def N(self):
        return [p.N for p in self.points]

    @property
    def M_star(self):
        return [p.M_star for p in self.points]

    def ratios(self):
        return [p.M_star / p.N for p in self.points]


class _SigmaOracle:
    """``C_{N,M}`` for a fixed ``N`` and varying ``M`` using nested row slices."""

    def __init__(self, family, scheme, N):
        self.family, self.scheme, self.N = family, scheme, N
        self.problem = None
        self.seen = {}

    def __call__(self, M: int) -> float:
        if M in self.seen:
            return self.seen[M]
        if M < self.N:
            c = 0.0
        else:
            if self.problem is None or self.problem.M < M:
                self.problem = assemble(self.family, self.scheme, self.N, M)
            U = self.problem.rows(M)
            c = smallest_singular_value(U)
            if c <= RANK_TOL:
                c = 0.0
        self.seen[M] = c
        self._check_monotone()
        return c

    def _check_monotone(self):
        items = sorted(self.seen.items())
        for (m1, c1), (m2, c2) in zip(items, items[1:]):
            if c2 < c1 - 1e-10:
                log.warning("C_{N,M} not monotone in M: C(%d)=%.12g > C(%d)=%.12g", m1, c1, m2, c2)


def _stable(c: float, theta: float) -> bool:
    return c > 0 and 1.0 / c < theta * (1 + THETA_SLACK)


def stable_sampling_rate(query: SsrQuery, return_details: bool = False):
    """Least ``M`` with ``1/C_{N,M} < theta``.

    Doubling from ``M = N`` brackets the threshold, then bisection locates it;
    both rely on ``C_{N,M}`` being nondecreasing in ``M``.
    """
    oracle = _SigmaOracle(query.family, query.scheme, query.N)
    lo, hi = query.N - 1, query.N  # C(lo) is known to fail (fewer samples than unknowns)
    while not _stable(oracle(hi), query.theta):
        if hi >= query.search_cap:
            raise SsrCapError(query.N, query.search_cap, max(oracle.seen.values()))
        lo, hi = hi, min(2 * hi, query.search_cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _stable(oracle(mid), query.theta):
            hi = mid
        else:
            lo = mid
    if not return_details:
        return hi
    return SsrResult(query.N, hi, oracle(hi), len(oracle.seen))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("GS_THREADS", "1")))
    except ValueError:
        return 1


def ssr_curve(family, scheme, theta, N_list, search_cap: int = 0) -> SsrCurve:
    def one(N):
        return stable_sampling_rate(SsrQuery(family, scheme, theta, int(N), search_cap), True)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, N_list))
    curve = SsrCurve(theta, scheme.eps, family.name, sorted(results, key=lambda r: r.N))
    ms = curve.M_star
    if any(b < a for a, b in zip(ms, ms[1:])):
        log.warning("SSR curve is not nondecreasing in N: %s", ms)
    return curve


def asymptotic_ratio(family: WaveletFamily, scheme: SamplingScheme) -> float:
    """Limit of ``Theta(N_R)/N_R``: ``1 / (eps * ceil(a))``."""
    return 1.0 / (scheme.eps * family.ceil_a)


# ---------------------------------------------------------------------------
# instability below the critical ratio


@dataclass(frozen=True)
class BlowupRow:
    R: int
    N_R: int
    M: int
    sigma_min: float

    @property
    def kappa(self) -> float:
        return math.inf if self.sigma_min == 0 else 1.0 / self.sigma_min

    @property
    def log10_kappa(self) -> float:
        return math.inf if self.sigma_min == 0 else -math.log10(self.sigma_min)


def blowup_experiment(family, scheme, c: float, R_list) -> list[BlowupRow]:
    """``sigma_min`` of ``U`` with ``N = N_R`` and ``M = floor(c 2^R)`` for sub-critical ``c``."""
    if not 0 < c < 1.0 / scheme.eps:
        raise ValueError(f"need 0 < c < 1/eps = {1.0 / scheme.eps:g}")
    rows = []
    for R in R_list:
        N = n_r(family, R)
        M = int(math.floor(c * 2**R))
        sigma = smallest_singular_value(assemble(family, scheme, N, M).U) if M >= N else 0.0
        rows.append(BlowupRow(R, N, M, sigma))
    return rows


@dataclass(frozen=True)
class BlowupFit:
    slope: float
    intercept: float
    r_squared: float
    top_growth: float  # kappa(R_max) / kappa(R_max - 1)

    @property
    def exponential(self) -> bool:
        return self.slope > 0 and self.r_squared > 0.9


def fit_blowup(rows, last: int | None = 4) -> BlowupFit:
    """Least-squares line of ``ln kappa`` against ``2^R`` over the largest ``last`` rows."""
    rows = sorted(rows, key=lambda r: r.R)
    if last:
        rows = rows[-last:]
    x = np.array([2.0**r.R for r in rows])
    y = np.array([math.log(r.kappa) if r.sigma_min > 0 else math.inf for r in rows])
    if len(rows) < 2 or not np.all(np.isfinite(y)):
        return BlowupFit(math.nan, math.nan, math.nan, math.nan)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else math.nan
    growth = rows[-1].kappa / rows[-2].kappa
    return BlowupFit(float(slope), float(intercept), r2, growth)


# ---------------------------------------------------------------------------
# Chebyshev witnesses


def chebyshev_q(n: int, omega: float, z) -> np.ndarray:
    """``Q_{n,omega}(z) = T_{2n}(sin(z/2) / sin(omega/2))``, evaluated in closed form."""
    x = np.sin(np.asarray(z, dtype=float) / 2.0) / math.sin(omega / 2.0)
    ax = np.abs(x)
    inside = ax <= 1.0
    out = np.empty(x.shape)
    out[inside] = np.cos(2 * n * np.arccos(np.clip(x[inside], -1.0, 1.0)))
    out[~inside] = np.cosh(2 * n * np.arccosh(ax[~inside]))
    return out


def chebyshev_qomega(n: int, omega: float, normalize: bool = True):
    """Coefficients ``c_j`` (``|j| <= n``) with ``Q_{n,omega}(z) = sum_j c_j e^{i j z}``.

    With ``normalize`` the polynomial is divided by its sup norm on ``[-pi, pi]``,
    which is ``Q_{n,omega}(pi)``.  Returned as a :class:`~gsrecon.oracles.TrigPoly`
    in the variable ``z / (2 pi)``.
    """
    from .oracles import TrigPoly

    if n < 1:
        raise ValueError("n must be >= 1")
    L = 4 * n + 4
    z = 2 * math.pi * np.arange(L) / L
    vals = chebyshev_q(n, omega, z)
    spec = np.fft.fft(vals) / L
    j = np.arange(-n, n + 1)
    coeffs = spec[j % L]
    if normalize:
        coeffs = coeffs / float(chebyshev_q(n, omega, np.array([math.pi]))[0])
    return TrigPoly(coeffs, -n, n)


@dataclass(frozen=True)
class ChebyshevWitness:
    R: int
    M: int
    p: int
    rayleigh: float  # ||P_M phi||^2 / ||phi||^2 for the witness phi in T_{N_R}
    bound: float  # D_R * ||q_omega||_{L^inf[-omega, omega]}^2


def chebyshev_witness(family: WaveletFamily, scheme: SamplingScheme, c: float, R: int):
    """Rayleigh quotient of the Chebyshev witness built on fine-scale shifts ``0..2p``.

    The witness is ``phi = sum_l beta_l phi_{R,l}`` whose trigonometric symbol is
    ``Q_{p,omega}`` with ``omega = pi c eps``.  Its quotient bounds ``C_{N_R,M}^2``
    from above and must itself lie below ``D_R / Q_{p,omega}(pi)^2``.
    """
    eps = scheme.eps
    ca = family.ceil_a
    p = (2 ** (R - 1) - 1) * ca
    if p < 1:
        raise ValueError("R too small for a nontrivial witness")
    omega = max(math.pi * c * eps, math.pi / 2)
    M = int(math.floor(c * 2**R))
    from .sampling import sample_indices

    j = sample_indices(M)
    t = 2 * math.pi * eps * j / 2**R
    phi_hat = np.abs(scaling_fourier(family, -t)) ** 2
    sym = chebyshev_q(p, omega, t) ** 2
    num = float(np.sum(eps / 2**R * sym * phi_hat))
    # ||beta||^2 by exact trapezoid sums of |Q|^2 on enough nodes
    L = 4 * p + 4
    grid = 2 * math.pi * np.arange(L) / L
    den = float(np.mean(chebyshev_q(p, omega, grid) ** 2))
    sup_phi = float(np.max(np.abs(scaling_fourier(family, np.linspace(-omega, omega, 2001)))))
    D_R = (2 * p + 1) * c * eps * sup_phi**2
    q_pi = float(chebyshev_q(p, omega, np.array([math.pi]))[0])
    return ChebyshevWitness(R, M, p, num / den, D_R / q_pi**2)
