"""Self-check suite behind ``gsrecon verify``: oracle cross-checks and invariants.

Every check is seeded and prints no timings, so two runs give identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .engine import assemble, c_nm
from .oracles import TrigPoly, UniformGrid, dft_exactness_check, grochenig_check, quadrature_inner_product
from .sampling import SamplingScheme, sample_indices
from .wavelets import WaveletFamily, basis_values, make_family, scaling_fourier

SEED = 20240611


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def perturb(family: WaveletFamily, index: int, delta: float) -> WaveletFamily:
    taps = list(family.taps)
    taps[index] += delta
    return replace(family, taps=tuple(taps))


def check_filters(families) -> list[Check]:
    out = []
    for fam in families:
        problems = fam.check_invariants()
        out.append(Check(f"filter/{fam.name} orthonormality", not problems,
                         "; ".join(problems) if problems else "sum, shift orthonormality, m0(0)=1"))
    return out


def check_dft(n: int = 100, tol: float = 1e-12) -> Check:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(n):
        deg = int(rng.integers(0, 65))
        p = TrigPoly.random(rng, deg, A1=int(rng.integers(-20, 21)))
        L = (deg + 2) // 2 + int(rng.integers(0, 8))
        lhs, rhs = dft_exactness_check(p, L)
        worst = max(worst, abs(lhs - rhs) / rhs)
    return Check("oracle/dft identity", worst <= tol, f"max rel dev {worst:.2e} over {n} polys")


def check_grochenig(n: int = 100) -> Check:
    rng = np.random.default_rng(SEED + 1)
    bad = 0
    for _ in range(n):
        D = int(rng.integers(1, 33))
        deg = int(rng.integers(0, 2 * D + 1))
        p = TrigPoly.random(rng, deg, A1=-D)
        r = int(rng.integers(2 * D + 2, 6 * D + 4))
        base = np.arange(r) / r
        # jitter small enough to keep the max gap below 1/(2D)
        slack = 1.0 / (2 * D) - 1.0 / r
        x = np.sort(base + rng.uniform(0, 0.49 * slack, r))
        lo, mid, hi = grochenig_check(p, x, D)
        bad += not (lo <= mid * (1 + 1e-12) and mid <= hi * (1 + 1e-12))
    return Check("oracle/jittered-node inequality", bad == 0, f"{n - bad}/{n} instances satisfy the bounds")


def check_entries(families, size: int = 16, level: int = 14, tol: float = 1e-6) -> list[Check]:
    """Frequency-domain entries of ``U`` against time-domain trapezoid inner products."""
    out = []
    for fam in families:
        scheme = SamplingScheme.for_family(fam)
        U = assemble(fam, scheme, size, size).U
        lo, hi = scheme.window
        lo, hi = math.floor(lo) - 1.0, math.ceil(hi) + 1.0
        grid = UniformGrid.dyadic(lo, hi, level)
        x = grid.x
        worst = est = 0.0
        # the cascade must resolve the finest dilation on the quadrature grid
        levels = level + 1 + int(math.log2(size))
        for p in range(1, size + 1):
            phi = basis_values(fam, p, x, levels=levels)
            for i, l in enumerate(sample_indices(size)):
                # phi vanishes outside the window, so the exponential need not be cut off
                # there; a cut would put a second jump on top of phi's own end jumps
                s = math.sqrt(scheme.eps) * np.exp(2j * math.pi * int(l) * scheme.eps * x)
                q = quadrature_inner_product(phi, s, grid)
                worst = max(worst, abs(q.value - U[i, p - 1]))
                est = max(est, q.error)
        out.append(Check(f"entries/{fam.name} vs quadrature", worst <= tol,
                         f"{size}x{size} max |diff| {worst:.2e} (halving est {est:.1e})"))
    return out


def check_shift_orthogonality(fam: WaveletFamily, level: int = 12, tol: float = 1e-5) -> Check:
    grid = UniformGrid.dyadic(-float(fam.ceil_a), 2.0 * fam.ceil_a, level)
    a = basis_values(fam, 1, grid.x, levels=level + 2)
    b = basis_values(fam, 2, grid.x, levels=level + 2)
    q = quadrature_inner_product(a, b, grid)
    n = quadrature_inner_product(a, a, grid)
    ok = abs(q.value) <= tol and abs(n.value - 1) <= tol
    return Check(f"cascade/{fam.name} shift orthonormality", ok,
                 f"<phi,phi(.-1)>={abs(q.value):.1e}, |phi|^2-1={abs(n.value - 1):.1e}")


def check_partition(families, K: int = 0, tol: float = 1e-6) -> list[Check]:
    """``sum_k |phi_hat(xi + 2 pi k)|^2 = 1`` at a few frequencies.

    The Haar tail decays like ``1/K``, so it gets a longer sum (closed form, cheap).
    """
    out = []
    for fam in families:
        k_max = K or (2**18 if fam.canonical == "haar" else 2**12)
        ks = np.arange(-k_max, k_max + 1)
        worst = 0.0
        for xi in (0.0, 0.7, math.pi / 2, 2.5):
            s = float(np.sum(np.abs(scaling_fourier(fam, xi + 2 * math.pi * ks)) ** 2))
            worst = max(worst, abs(s - 1))
        out.append(Check(f"fourier/{fam.name} partition of unity", worst <= tol,
                         f"max |sum - 1| {worst:.1e} with |k| <= {k_max}"))
    return out


def check_cnm(families, N_max: int = 64) -> list[Check]:
    out = []
    for fam in families:
        scheme = SamplingScheme.for_family(fam)
        ok = True
        last_vals = []
        for N in (4, 16, N_max):
            Ms = [N, 2 * N, 4 * N, 8 * N, 32 * N]
            prob = assemble(fam, scheme, N, Ms[-1])
            vals = [c_nm(replace(prob, M=M, U=prob.rows(M))) for M in Ms]
            ok &= all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))
            ok &= vals[-1] > 0.97
            last_vals.append(vals[-1])
        out.append(Check(f"engine/{fam.name} C(N,M) monotone and -> 1", bool(ok),
                         "C(N,32N) = " + ", ".join(f"{v:.4f}" for v in last_vals)))
    return out


def run_checks(families=None, quick: bool = False) -> list[Check]:
    if families is None:
        families = [make_family(n) for n in ("haar", "db4", "db6", "db8")]
    checks = check_filters(families)
    valid = [f for f in families if not f.check_invariants()]
    checks += [check_dft(), check_grochenig()]
    probe = [f for f in valid if f.canonical in ("haar", "db4")]
    checks += check_entries(probe, size=8 if quick else 16)
    checks += [check_shift_orthogonality(f) for f in valid if f.canonical != "haar"]
    checks += check_partition(valid, K=2**12 if quick else 0, tol=1e-3 if quick else 1e-6)
    checks += check_cnm(valid[:2])
    return checks


def format_report(checks) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.detail}" for c in checks]
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"


def parse_perturbation(spec: str) -> tuple[str, int, float]:
    """``"db4:2:1e-3"`` -> family, tap index, additive change."""
    try:
        name, idx, delta = spec.split(":")
        return name, int(idx), float(Fraction(delta)) if "/" in delta else float(delta)
    except ValueError as exc:
        raise ValueError(f"perturbation must look like FAMILY:INDEX:DELTA, got {spec!r}") from exc
