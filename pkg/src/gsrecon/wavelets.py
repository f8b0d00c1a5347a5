"""Compactly supported orthonormal wavelet families and reconstruction-space bookkeeping.

Fourier transforms use ``g_hat(w) = int g(x) exp(-i w x) dx``.  Scaling functions
satisfy ``phi(x) = sqrt(2) sum_k h_k phi(2x - k)`` with support ``[0, a]`` where
``a = len(taps) - 1``; the wavelet uses ``g_k = (-1)^k h_{a-k}`` so that it shares
the same support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

SQRT2 = math.sqrt(2.0)

_S3 = math.sqrt(3.0)

# Standard orthonormal Daubechies low-pass filters (sum = sqrt(2)).
_TAPS = {
    "haar": (1.0 / SQRT2, 1.0 / SQRT2),
    "db4": tuple(c / (4.0 * SQRT2) for c in (1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3)),
    "db6": (
        0.33267055295008261599851158914,
        0.80689150931109257649449360409,
        0.45987750211849157009515194215,
        -0.13501102001025458869638990670,
        -0.08544127388202666169281100928,
        0.03522629188570953660274066472,
    ),
    "db8": (
        0.23037781330885523095,
        0.71484657055254153151,
        0.63088076792959036084,
        -0.02798376941698385965,
        -0.18703481171888114203,
        0.03084138183598697811,
        0.03288301166698295497,
        -0.01059740178499728185,
    ),
}

# Vanishing-moment names used in the reference tables: "DB 2" has 4 taps, "DB 3" has 6.
ALIASES = {"db2t": "db4", "db3t": "db6", "db4t": "db8", "db1t": "haar"}

FAMILY_NAMES = tuple(_TAPS) + tuple(ALIASES)


class UnknownFamilyError(ValueError):
    pass


@dataclass(frozen=True)
class WaveletFamily:
    """Orthonormal MRA generated by a finite low-pass filter.

    Attributes
    ----------
    name : str
        Name the family was requested under (aliases are kept).
    taps : tuple of float
        Low-pass coefficients ``h_0 .. h_{K-1}``.
    product_depth : int
        Minimum number of factors in the truncated infinite product.
    tail_tol : float
        Target truncation error of the product.
    """

    name: str
    taps: tuple
    product_depth: int = 24
    tail_tol: float = 1e-9
    canonical: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.taps) < 2 or len(self.taps) % 2:
            raise ValueError("filter must have an even number (>= 2) of taps")
        if not self.canonical:
            object.__setattr__(self, "canonical", self.name)

    @property
    def support_a(self) -> int:
        return len(self.taps) - 1

    @property
    def ceil_a(self) -> int:
        return int(math.ceil(self.support_a))

    @cached_property
    def h(self) -> np.ndarray:
        return np.asarray(self.taps, dtype=float)

    @cached_property
    def g(self) -> np.ndarray:
        a = self.support_a
        k = np.arange(a + 1)
        return (-1.0) ** k * self.h[a - k]

    @cached_property
    def first_moment(self) -> float:
        """``int x phi(x) dx``, used to correct the truncated product tail."""
        return float(np.dot(np.arange(len(self.h)), self.h) / SQRT2)

    def check_invariants(self, tol: float = 1e-10) -> list[str]:
        """Return a list of violated filter identities (empty when the filter is valid)."""
        problems = []
        h = self.h
        if abs(h.sum() - SQRT2) > 1e-12:
            problems.append(f"sum of taps {float(h.sum())!r} != sqrt(2)")
        for m in range(len(h) // 2):
            s = float(np.dot(h[: len(h) - 2 * m], h[2 * m:]))
            target = 1.0 if m == 0 else 0.0
            if abs(s - target) > tol:
                problems.append(f"shift orthonormality fails at m={m}: {s!r}")
        if abs(m0(self, 0.0) - 1.0) > 1e-12:
            problems.append("m0(0) != 1")
        return problems


def make_family(name: str, **kwargs) -> WaveletFamily:
    key = name.lower()
    canonical = ALIASES.get(key, key)
    if canonical not in _TAPS:
        raise UnknownFamilyError(
            f"unknown wavelet family {name!r}; choose from {', '.join(FAMILY_NAMES)}"
        )
    return WaveletFamily(name=key, taps=_TAPS[canonical], canonical=canonical, **kwargs)


def m0(family: WaveletFamily, xi):
    """Low-pass symbol ``(1/sqrt 2) sum_k h_k exp(-i k xi)``."""
    xi = np.asarray(xi, dtype=float)
    k = np.arange(len(family.h))
    out = np.exp(-1j * np.multiply.outer(xi, k)) @ family.h / SQRT2
    return out[()] if out.ndim == 0 else out


def _m1(family: WaveletFamily, xi):
    xi = np.asarray(xi, dtype=float)
    k = np.arange(len(family.g))
    return np.exp(-1j * np.multiply.outer(xi, k)) @ family.g / SQRT2


def _depth(family: WaveletFamily, xi_max: float) -> int:
    # remaining factor is exp(-i mu t)(1 + O(t^2)) with t = xi / 2^K
    if xi_max <= 0:
        return family.product_depth
    need = math.ceil(math.log2(xi_max / math.sqrt(family.tail_tol)))
    return max(family.product_depth, need)


def scaling_fourier(family: WaveletFamily, xi):
    """Fourier transform of the scaling function via the truncated product of ``m0``.

    The product is cut at depth ``K`` with ``|xi| / 2^K <= sqrt(tail_tol)``; the
    omitted tail ``phi_hat(xi / 2^K)`` is replaced by its first-order phase
    ``exp(-i mu xi / 2^K)``, leaving an error of order ``tail_tol``.
    """
    xi = np.asarray(xi, dtype=float)
    if family.canonical == "haar":
        return _haar_scaling_fourier(xi)
    K = _depth(family, float(np.max(np.abs(xi), initial=0.0)))
    out = np.ones(xi.shape, dtype=complex)
    t = xi.copy()
    for _ in range(K):
        t = t / 2.0
        out *= m0(family, t)
    out *= np.exp(-1j * family.first_moment * t)
    return out[()] if out.ndim == 0 else out


def _haar_scaling_fourier(xi):
    # closed form of the telescoped product, (1 - e^{-i xi}) / (i xi)
    out = np.ones(xi.shape, dtype=complex)
    nz = np.abs(xi) > 1e-8
    x = xi[nz]
    out[nz] = (1.0 - np.exp(-1j * x)) / (1j * x)
    small = ~nz
    out[small] = np.exp(-0.5j * xi[small]) * (1.0 - xi[small] ** 2 / 24.0)
    return out[()] if out.ndim == 0 else out


def wavelet_fourier(family: WaveletFamily, xi):
    """``psi_hat(xi) = m1(xi/2) phi_hat(xi/2)`` with ``m1(xi) = -e^{-i a xi} conj(m0(xi + pi))``."""
    xi = np.asarray(xi, dtype=float)
    out = _m1(family, xi / 2.0) * scaling_fourier(family, xi / 2.0)
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True, order=True)
class BasisIndex:
    kind: str  # "scaling" or "wavelet"
    level: int
    shift: int

    @classmethod
    def scaling(cls, k: int) -> "BasisIndex":
        return cls("scaling", 0, int(k))

    @classmethod
    def wavelet(cls, j: int, k: int) -> "BasisIndex":
        return cls("wavelet", int(j), int(k))

    def validate(self, family: WaveletFamily) -> None:
        ca = family.ceil_a
        if self.kind == "scaling":
            if self.level != 0 or abs(self.shift) > ca - 1:
                raise ValueError(f"{self} is not in the reconstruction space (|k| <= {ca - 1})")
        elif self.kind == "wavelet":
            if self.level < 0 or not (-ca + 1 <= self.shift <= 2**self.level * ca - 1):
                raise ValueError(f"{self} is not in the reconstruction space")
        else:
            raise ValueError(f"unknown basis kind {self.kind!r}")

    def __str__(self):
        if self.kind == "scaling":
            return f"phi_0,{self.shift}"
        return f"psi_{self.level},{self.shift}"


def n_scaling(family: WaveletFamily) -> int:
    return 2 * family.ceil_a - 1


def level_size(family: WaveletFamily, j: int) -> int:
    """Number of wavelets of scale ``j`` in the reconstruction space."""
    return (2**j + 1) * family.ceil_a - 1


def n_r(family: WaveletFamily, R: int) -> int:
    if R < 0:
        raise ValueError("R must be >= 0")
    ca = family.ceil_a
    return 2**R * ca + (R + 1) * (ca - 1)


def position_to_index(family: WaveletFamily, p: int) -> BasisIndex:
    """Map a 1-based position in the basis ordering to its basis element."""
    if p < 1:
        raise ValueError("positions start at 1")
    ca = family.ceil_a
    ns = n_scaling(family)
    if p <= ns:
        return BasisIndex.scaling(p - ca)
    rem = p - ns - 1
    j = 0
    while rem >= level_size(family, j):
        rem -= level_size(family, j)
        j += 1
    return BasisIndex.wavelet(j, rem - ca + 1)


def index_to_position(family: WaveletFamily, idx: BasisIndex) -> int:
    idx.validate(family)
    ca = family.ceil_a
    if idx.kind == "scaling":
        return idx.shift + ca
    return n_r(family, idx.level) + idx.shift + ca


def positions_table(family: WaveletFamily, N: int):
    """Arrays ``(is_wavelet, level, shift)`` for positions ``1..N``."""
    kinds = np.zeros(N, dtype=bool)
    levels = np.zeros(N, dtype=int)
    shifts = np.zeros(N, dtype=int)
    ca = family.ceil_a
    ns = min(N, n_scaling(family))
    shifts[:ns] = np.arange(ns) - ca + 1
    pos, j = ns, 0
    while pos < N:
        cnt = min(level_size(family, j), N - pos)
        kinds[pos:pos + cnt] = True
        levels[pos:pos + cnt] = j
        shifts[pos:pos + cnt] = np.arange(cnt) - ca + 1
        pos += cnt
        j += 1
    return kinds, levels, shifts


def basis_fourier(family: WaveletFamily, idx: BasisIndex, omega):
    """Fourier transform of ``phi_{0,k}`` or ``psi_{j,k} = 2^{j/2} psi(2^j x - k)``."""
    idx.validate(family)
    omega = np.asarray(omega, dtype=float)
    scale = 2.0**idx.level
    base = scaling_fourier if idx.kind == "scaling" else wavelet_fourier
    out = scale**-0.5 * np.exp(-1j * omega * idx.shift / scale) * base(family, omega / scale)
    return out[()] if np.ndim(out) == 0 else out


def fine_scale_window(family: WaveletFamily, R: int) -> tuple[int, int]:
    """Shift window ``(A1, A2)`` with ``T_{N_R}`` inside ``span{phi_{R,k}: A1 <= k <= A2}``."""
    if R < 1:
        raise ValueError("fine_scale_window requires R >= 1")
    ca = family.ceil_a
    return -(2**R + 1) * ca + 2**R + 1, 2 ** (R + 1) * ca - 2**R - 1


# ---------------------------------------------------------------------------
# time-domain values on dyadic grids


@dataclass(frozen=True)
class CascadeResult:
    x: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    levels: int

    @property
    def h(self) -> float:
        return 2.0**-self.levels


def _integer_values(family: WaveletFamily) -> np.ndarray:
    a = family.support_a
    h = family.h
    A = np.zeros((a + 1, a + 1))
    for n in range(a + 1):
        for m in range(a + 1):
            k = 2 * n - m
            if 0 <= k < len(h):
                A[n, m] = SQRT2 * h[k]
    # phi vanishes at both support endpoints for continuous phi
    inner = A[1:a, 1:a]
    w, v = np.linalg.eig(inner)
    i = int(np.argmin(np.abs(w - 1.0)))
    vals = np.real(v[:, i])
    vals = vals / vals.sum()
    return np.concatenate([[0.0], vals, [0.0]])


def _refine(family: WaveletFamily, vals: np.ndarray, i: int, coeffs: np.ndarray) -> np.ndarray:
    # vals: function on grid m / 2^i over [0, a]; returns sqrt2 sum_k c_k f(2x - k) on grid m / 2^(i+1)
    a = family.support_a
    n_out = a * 2 ** (i + 1) + 1
    out = np.zeros(n_out)
    step = 2**i
    m = np.arange(n_out)
    for k, c in enumerate(coeffs):
        src = m - k * step
        ok = (src >= 0) & (src < len(vals))
        out[ok] += c * vals[src[ok]]
    return SQRT2 * out


def cascade_evaluate(family: WaveletFamily, levels: int) -> CascadeResult:
    """Values of ``phi`` and ``psi`` on ``2^-levels Z`` intersected with ``[0, a]``.

    Integer values come from the eigenvector of the refinement matrix, and each
    further level is filled in with the two-scale relation.  For Haar the jump
    points carry interior one-sided limits (midpoint at ``psi(1/2)``) so the
    trapezoid rule integrates them exactly.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    a = family.support_a
    x = np.arange(a * 2**levels + 1) / 2.0**levels
    if family.canonical == "haar":
        phi = np.ones_like(x)
        psi = np.where(x < 0.5, 1.0, -1.0)
        psi[x == 0.5] = 0.0
        return CascadeResult(x, phi, psi, levels)
    vals = _integer_values(family)
    for i in range(levels):
        vals = _refine(family, vals, i, family.h)
    return CascadeResult(x, vals, _psi_from_phi(family, vals, levels), levels)


def _psi_from_phi(family, phi, levels):
    # psi(m 2^-L) = sqrt2 sum_k g_k phi((2m - k 2^L) 2^-L)
    m = np.arange(len(phi))
    out = np.zeros(len(phi))
    for k, c in enumerate(family.g):
        src = 2 * m - k * 2**levels
        ok = (src >= 0) & (src < len(phi))
        out[ok] += c * phi[src[ok]]
    return SQRT2 * out


@lru_cache(maxsize=16)
def _cascade_cached(taps: tuple, canonical: str, levels: int) -> CascadeResult:
    return cascade_evaluate(WaveletFamily(canonical, taps, canonical=canonical), levels)


def basis_values(family: WaveletFamily, which, x, levels: int = 14) -> np.ndarray:
    """Time-domain values of a basis element (position or ``BasisIndex``) at ``x``.

    Exact at dyadic points of level ``levels - j``; linear interpolation elsewhere.
    Values at the support endpoints are halved, matching the midpoint convention
    at jumps so that trapezoid sums stay second order.
    """
    idx = which if isinstance(which, BasisIndex) else position_to_index(family, int(which))
    idx.validate(family)
    return dilated_values(family, idx.kind, idx.level, idx.shift, x, levels)


def dilated_values(family: WaveletFamily, kind: str, j: int, k: int, x, levels: int = 14):
    """``2^{j/2} g(2^j x - k)`` with ``g`` the scaling function or the wavelet."""
    cas = _cascade_cached(family.taps, family.canonical, levels)
    g = cas.phi if kind == "scaling" else cas.psi
    t = 2.0**j * np.asarray(x, dtype=float) - k
    a = family.support_a
    out = np.interp(t, cas.x, g, left=0.0, right=0.0)
    out = np.where((t == 0) | (t == a), 0.5 * out, out)
    return 2.0 ** (j / 2) * out
