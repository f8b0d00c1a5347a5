"""Brute-force oracles: trigonometric-polynomial identities and trapezoid inner products.

Nothing here reuses the frequency-domain entry formulas of the engine; the
quadrature routines work from time-domain samples only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class OraclePreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class TrigPoly:
    """``Phi(z) = sum_{j=A1}^{A2} alpha_j exp(2 pi i j z)``."""

    coefficients: np.ndarray
    A1: int
    A2: int

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if self.A1 > self.A2 or len(c) != self.A2 - self.A1 + 1:
            raise ValueError("coefficient count must equal A2 - A1 + 1")
        object.__setattr__(self, "coefficients", c)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        # Horner in w = exp(2 pi i z), then multiply by w^A1
        w = np.exp(2j * math.pi * z)
        acc = np.zeros(z.shape, dtype=complex)
        for c in self.coefficients[::-1]:
            acc = acc * w + c
        return acc * np.exp(2j * math.pi * self.A1 * z)

    def direct(self, z):
        z = np.asarray(z, dtype=float)
        j = np.arange(self.A1, self.A2 + 1)
        return np.exp(2j * math.pi * np.multiply.outer(z, j)) @ self.coefficients

    @property
    def l2_norm(self) -> float:
        """Norm on any unit interval, exact from the coefficients."""
        return float(np.linalg.norm(self.coefficients))

    @classmethod
    def random(cls, rng, degree: int, A1: int = 0) -> "TrigPoly":
        c = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        return cls(c, A1, A1 + degree)


def dft_exactness_check(p: TrigPoly, L: int) -> tuple[float, float]:
    """``(1/2L) sum_{j<2L} |Phi(j/2L)|^2`` and ``sum |alpha_j|^2``; equal when ``2L > A2 - A1``."""
    if 2 * L < p.A2 - p.A1 + 1:
        raise OraclePreconditionError(
            f"2L={2 * L} nodes cannot resolve {p.A2 - p.A1 + 1} coefficients"
        )
    nodes = np.arange(2 * L) / (2 * L)
    lhs = float(np.mean(np.abs(p(nodes)) ** 2))
    return lhs, p.l2_norm**2


def grochenig_check(p: TrigPoly, nodes, D: int) -> tuple[float, float, float]:
    """Weighted-sampling bounds for a trigonometric polynomial on irregular nodes.

    Parameters
    ----------
    p : TrigPoly
        Polynomial with ``A2 - A1 <= 2D``.
    nodes : array_like
        Strictly increasing nodes in ``[A, A + 1)`` with maximal (cyclic) gap
        ``delta < 1 / (2D)``.
    D : int

    Returns
    -------
    lower, middle, upper : float
        ``(1 - 2 delta D) ||Phi||``, ``sqrt(sum nu_j |Phi(x_j)|^2)`` and
        ``(1 + 2 delta D) ||Phi||`` with ``nu_j = (x_{j+1} - x_{j-1}) / 2``.
    """
    x = np.asarray(nodes, dtype=float)
    if x.ndim != 1 or len(x) < 1 or np.any(np.diff(x) <= 0):
        raise OraclePreconditionError("nodes must be strictly increasing")
    if x[-1] >= x[0] + 1:
        raise OraclePreconditionError("nodes must lie in a half-open unit interval")
    if p.A2 - p.A1 > 2 * D:
        raise OraclePreconditionError(f"degree span {p.A2 - p.A1} exceeds 2D={2 * D}")
    nxt = np.append(x[1:], x[0] + 1)
    prv = np.insert(x[:-1], 0, x[-1] - 1)
    delta = float(np.max(nxt - x))
    if not delta < 1.0 / (2 * D):
        raise OraclePreconditionError(f"max gap {delta:.4g} must be < 1/(2D) = {1 / (2 * D):.4g}")
    nu = 0.5 * (nxt - prv)
    middle = math.sqrt(float(np.sum(nu * np.abs(p(x)) ** 2)))
    norm = p.l2_norm
    return (1 - 2 * delta * D) * norm, middle, (1 + 2 * delta * D) * norm


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class UniformGrid:
    start: float
    step: float
    n: int

    @property
    def x(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.n)

    @classmethod
    def dyadic(cls, lo: float, hi: float, level: int) -> "UniformGrid":
        step = 2.0**-level
        n = int(round((hi - lo) / step)) + 1
        return cls(float(lo), step, n)


@dataclass(frozen=True)
class Quadrature:
    value: complex
    error: float


def _trapezoid(y: np.ndarray, h: float) -> complex:
    return h * (np.sum(y) - 0.5 * (y[0] + y[-1]))


def quadrature_inner_product(g_samples, h_samples, grid: UniformGrid) -> Quadrature:
    """Trapezoid value of ``int conj(g) h`` with a conservative grid-halving error estimate.

    The inner product is conjugate-linear in its first argument, so
    ``<phi, s_l> = sqrt(eps) int phi(x) exp(2 pi i eps l x) dx`` for real ``phi``.
    """
    g = np.asarray(g_samples)
    hh = np.asarray(h_samples)
    if g.shape != (grid.n,) or hh.shape != (grid.n,):
        raise OraclePreconditionError(
            f"samples of shape {g.shape} / {hh.shape} do not match grid of {grid.n} points"
        )
    y = np.conj(g) * hh
    fine = _trapezoid(y, grid.step)
    if grid.n >= 3 and (grid.n - 1) % 2 == 0:
        coarse = _trapezoid(y[::2], 2 * grid.step)
        # the bare difference: 3x the Richardson value for smooth (O(h^2)) integrands,
        # still an upper estimate when jumps drop the rate to O(h)
        err = abs(fine - coarse)
    else:
        err = math.inf
    return Quadrature(complex(fine), float(err))
