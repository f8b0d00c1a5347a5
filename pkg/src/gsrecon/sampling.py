"""Uniform Fourier sampling: density, window, sample index sets and signal models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .wavelets import WaveletFamily, positions_table, scaling_fourier, wavelet_fourier


class SchemeError(ValueError):
    """Sampling parameters violate the density or window constraints."""


class SupportError(ValueError):
    pass


@dataclass(frozen=True)
class SamplingScheme:
    """Sampling vectors ``s_l = sqrt(eps) exp(2 pi i l eps x)`` on a window of length ``1/eps``.

    ``epsilon`` may be given as a ``Fraction`` to keep rational densities exact in
    provenance records; arithmetic uses its float value.
    """

    epsilon: Union[float, Fraction]
    T1: float
    T2: float

    def __post_init__(self):
        eps = float(self.epsilon)
        if not eps > 0:
            raise SchemeError("sampling density must be positive")
        if self.T1 < 0 or self.T2 <= 0:
            raise SchemeError("window must satisfy T1 >= 0, T2 > 0")
        if eps > 1.0 / (self.T1 + self.T2) * (1 + 1e-12):
            raise SchemeError(
                f"epsilon={eps:g} exceeds the Nyquist limit 1/(T1+T2) = {1.0 / (self.T1 + self.T2):g}"
            )

    @property
    def eps(self) -> float:
        return float(self.epsilon)

    @classmethod
    def for_family(cls, family: WaveletFamily, epsilon=None) -> "SamplingScheme":
        """Minimal window ``[-(ceil a - 1), 2 ceil a - 1]``; density defaults to its Nyquist limit."""
        ca = family.ceil_a
        T1, T2 = ca - 1, 2 * ca - 1
        if epsilon is None:
            epsilon = Fraction(1, T1 + T2)
        return cls(epsilon, T1, T2)

    def check_family(self, family: WaveletFamily) -> None:
        ca = family.ceil_a
        if self.T1 < ca - 1 or self.T2 < 2 * ca - 1:
            raise SchemeError(
                f"window [-{self.T1}, {self.T2}] does not contain the {family.name} reconstruction space"
            )

    @property
    def window(self) -> tuple[float, float]:
        """Support of every sampling vector, an interval of length ``1/eps``."""
        s = self.eps * (self.T1 + self.T2)
        return -self.T1 / s, self.T2 / s

    def omegas(self, M: int) -> np.ndarray:
        """Angular frequencies ``-2 pi eps l`` at which ``f_hat`` is sampled."""
        return -2.0 * math.pi * self.eps * sample_indices(M)

    def vector(self, l: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.window
        # half weight on the window edges (midpoint value at the jump)
        weight = np.where((x > lo) & (x < hi), 1.0, np.where((x == lo) | (x == hi), 0.5, 0.0))
        return weight * math.sqrt(self.eps) * np.exp(2j * math.pi * l * self.eps * x)


def sample_indices(M: int) -> np.ndarray:
    """``l = -floor(M/2), ..., ceil(M/2) - 1``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return np.arange(-(M // 2), (M + 1) // 2)


# ---------------------------------------------------------------------------
# function models


@dataclass(frozen=True)
class WaveletCombo:
    family: WaveletFamily
    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def support(self) -> tuple[float, float]:
        ca = self.family.ceil_a
        return -(ca - 1), 2 * ca - 1


@dataclass(frozen=True)
class PiecewiseConstant:
    breakpoints: Sequence[float]
    values: Sequence[float]

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if len(b) != len(v) + 1:
            raise ValueError("need one more breakpoint than values")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        i = np.searchsorted(self.breakpoints, x, side="right") - 1
        ok = (i >= 0) & (i < len(self.values))
        out = np.zeros(x.shape, dtype=complex)
        out[ok] = self.values[i[ok]]
        return out

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * np.diff(self.breakpoints))))

    @classmethod
    def from_boxes(cls, boxes) -> "PiecewiseConstant":
        """Sum of ``height * indicator([lo, hi])`` terms given as ``(lo, hi, height)``."""
        pts = sorted({p for lo, hi, _ in boxes for p in (lo, hi)})
        vals = []
        for lo, hi in zip(pts[:-1], pts[1:]):
            mid = 0.5 * (lo + hi)
            vals.append(sum(hgt for a, b, hgt in boxes if a <= mid <= b))
        return cls(pts, vals)


@dataclass(frozen=True)
class CallableModel:
    """Function known through a callable; samples use composite trapezoid quadrature."""

    func: Callable
    lo: float
    hi: float
    grid_points: int = 2**16 + 1

    def support(self) -> tuple[float, float]:
        return self.lo, self.hi

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, self.func(np.clip(x, self.lo, self.hi)), 0.0)


FunctionModel = Union[WaveletCombo, PiecewiseConstant, CallableModel]


# ---------------------------------------------------------------------------
# samples


@dataclass
class SampleVector:
    values: np.ndarray
    epsilon: Union[float, Fraction]
    T1: float
    T2: float
    noise_norm: float = 0.0
    seed: Optional[int] = None
    quadrature_error: float = 0.0
    noise: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)

    @property
    def M(self) -> int:
        return len(self.values)

    @property
    def indices(self) -> np.ndarray:
        return sample_indices(self.M)

    @property
    def scheme(self) -> SamplingScheme:
        return SamplingScheme(self.epsilon, self.T1, self.T2)


def fourier_matrix(family: WaveletFamily, omega, N: int, chunk: int = 1 << 22) -> np.ndarray:
    """Fourier transforms of the first ``N`` basis elements at frequencies ``omega``.

    Returns an array of shape ``(len(omega), N)`` whose column ``p`` holds
    ``basis_fourier(position p + 1, omega)``.  The transform of the generator is
    evaluated once per scale and combined with the shift phases per entry.
    """
    omega = np.asarray(omega, dtype=float)
    is_wav, levels, shifts = positions_table(family, N)
    out = np.empty((len(omega), N), dtype=complex)
    groups = [(False, 0)] + [(True, int(j)) for j in np.unique(levels[is_wav])]
    for wav, j in groups:
        cols = np.nonzero((is_wav == wav) & (levels == j))[0]
        if cols.size == 0:
            continue
        scale = 2.0**j
        gen = (wavelet_fourier if wav else scaling_fourier)(family, omega / scale)
        gen = np.atleast_1d(gen) * scale**-0.5
        rows_per = max(1, chunk // cols.size)
        for r0 in range(0, len(omega), rows_per):
            sl = slice(r0, r0 + rows_per)
            phase = np.exp(-1j * np.multiply.outer(omega[sl] / scale, shifts[cols]))
            out[sl, cols] = gen[sl, None] * phase
    return out


def combo_fourier(family: WaveletFamily, beta, omega, chunk: int = 1 << 22) -> np.ndarray:
    """``sum_p beta_p basis_fourier(p, omega)`` without storing the full matrix."""
    beta = np.asarray(beta)
    omega = np.asarray(omega, dtype=float)
    J = len(beta)
    is_wav, levels, shifts = positions_table(family, J)
    total = np.zeros(len(omega), dtype=complex)
    groups = [(False, 0)] + [(True, int(j)) for j in np.unique(levels[is_wav])]
    for wav, j in groups:
        cols = np.nonzero((is_wav == wav) & (levels == j))[0]
        if cols.size == 0:
            continue
        scale = 2.0**j
        gen = np.atleast_1d((wavelet_fourier if wav else scaling_fourier)(family, omega / scale))
        rows_per = max(1, chunk // cols.size)
        acc = np.empty(len(omega), dtype=complex)
        for r0 in range(0, len(omega), rows_per):
            sl = slice(r0, r0 + rows_per)
            phase = np.exp(-1j * np.multiply.outer(omega[sl] / scale, shifts[cols]))
            acc[sl] = phase @ beta[cols]
        total += scale**-0.5 * gen * acc
    return total


def _check_support(scheme: SamplingScheme, model) -> None:
    lo, hi = model.support()
    if lo < -scheme.T1 - 1e-12 or hi > scheme.T2 + 1e-12:
        raise SupportError(f"model support [{lo}, {hi}] not inside [-{scheme.T1}, {scheme.T2}]")


def _piecewise_samples(scheme: SamplingScheme, model: PiecewiseConstant, ls) -> np.ndarray:
    w = 2.0 * math.pi * scheme.eps * np.asarray(ls, dtype=float)
    b = model.breakpoints
    out = np.empty(len(w), dtype=complex)
    nz = w != 0
    e = np.exp(1j * np.multiply.outer(w[nz], b))
    out[nz] = ((e[:, 1:] - e[:, :-1]) @ model.values) / (1j * w[nz])
    out[~nz] = np.dot(model.values, np.diff(b))
    return math.sqrt(scheme.eps) * out


def _callable_samples(scheme: SamplingScheme, model: CallableModel, ls):
    x = np.linspace(model.lo, model.hi, model.grid_points)
    fx = model(x)
    w = 2.0 * math.pi * scheme.eps * np.asarray(ls, dtype=float)

    def trap(xs, ys):
        hstep = xs[1] - xs[0]
        out = np.empty(len(w), dtype=complex)
        for i0 in range(0, len(w), 256):
            kern = np.exp(1j * np.multiply.outer(w[i0:i0 + 256], xs)) * ys
            out[i0:i0 + 256] = hstep * (kern.sum(axis=1) - 0.5 * (kern[:, 0] + kern[:, -1]))
        return out

    fine = trap(x, fx)
    coarse = trap(x[::2], fx[::2])
    err = float(np.max(np.abs(fine - coarse)) / 3.0) if len(w) else 0.0
    return math.sqrt(scheme.eps) * fine, math.sqrt(scheme.eps) * err


def sample_inner_product(scheme: SamplingScheme, model: FunctionModel, l: int) -> complex:
    """``<f, s_l> = sqrt(eps) int f(x) exp(2 pi i eps l x) dx = sqrt(eps) f_hat(-2 pi eps l)``."""
    return complex(_samples(scheme, model, np.array([l]))[0][0])


def _samples(scheme, model, ls):
    _check_support(scheme, model)
    if isinstance(model, WaveletCombo):
        scheme.check_family(model.family)
        omega = -2.0 * math.pi * scheme.eps * np.asarray(ls, dtype=float)
        return math.sqrt(scheme.eps) * combo_fourier(model.family, model.coefficients, omega), 0.0
    if isinstance(model, PiecewiseConstant):
        return _piecewise_samples(scheme, model, ls), 0.0
    if isinstance(model, CallableModel):
        return _callable_samples(scheme, model, ls)
    raise TypeError(f"unsupported function model {type(model).__name__}")


def synthesize_samples(scheme: SamplingScheme, model: FunctionModel, M: int) -> SampleVector:
    vals, qerr = _samples(scheme, model, sample_indices(M))
    return SampleVector(vals, scheme.epsilon, scheme.T1, scheme.T2, quadrature_error=qerr)


def add_noise(v: SampleVector, level: float, seed: int) -> SampleVector:
    """Add a complex Gaussian perturbation rescaled to Euclidean norm exactly ``level``."""
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(v.M) + 1j * rng.standard_normal(v.M)
    if level == 0:
        z = np.zeros(v.M, dtype=complex)
    else:
        z *= level / np.linalg.norm(z)
    return SampleVector(
        v.values + z, v.epsilon, v.T1, v.T2,
        noise_norm=float(np.linalg.norm(z)), seed=seed,
        quadrature_error=v.quadrature_error, noise=z,
    )


def truncated_fourier_error(scheme: SamplingScheme, model: WaveletCombo, M: int) -> float:
    """``||f - P_M f||`` for a finite wavelet expansion, exact up to rounding."""
    if not isinstance(model, WaveletCombo):
        raise TypeError("truncated_fourier_error needs a WaveletCombo (exact norm)")
    samples = synthesize_samples(scheme, model, M)
    gap = model.norm**2 - float(np.sum(np.abs(samples.values) ** 2))
    return math.sqrt(max(gap, 0.0))


def fourier_partial_sum(samples: SampleVector, x) -> np.ndarray:
    """Evaluate ``P_M f = sum_l <f, s_l> conj-kernel`` on the sampling window."""
    x = np.asarray(x, dtype=float)
    eps = float(samples.epsilon)
    ls = samples.indices
    out = np.zeros(x.shape, dtype=complex)
    for i0 in range(0, len(ls), 512):
        kern = np.exp(-2j * math.pi * eps * np.multiply.outer(x, ls[i0:i0 + 512]))
        out += kern @ samples.values[i0:i0 + 512]
    return math.sqrt(eps) * out
