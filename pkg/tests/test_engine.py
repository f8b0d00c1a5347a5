import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsrecon.engine import (
    IllPosedError,
    assemble,
    best_approx_error,
    c_nm,
    evaluate_expansion,
    reconstruction_error,
    solve,
)
from gsrecon.sampling import SamplingScheme, WaveletCombo, synthesize_samples
from gsrecon.ssr import SsrQuery, stable_sampling_rate
from gsrecon.wavelets import make_family, n_r

THETA_DB4 = 1 / 0.684


@pytest.fixture(scope="module")
def haar_scheme(haar):
    return SamplingScheme.for_family(haar)


@pytest.fixture(scope="module")
def db4_scheme(db4):
    return SamplingScheme.for_family(db4)


def test_single_entry(haar, haar_scheme):
    p = assemble(haar, haar_scheme, 1, 1)
    assert p.U.shape == (1, 1)
    assert p.U[0, 0] == pytest.approx(1.0, abs=1e-15)


def test_haar_two_by_two_closed_form(haar, haar_scheme):
    # rows l = -1, 0; columns phi, psi_{0,0}
    U = assemble(haar, haar_scheme, 2, 2).U
    # psi_hat(-2 pi l) for l = -1: int_0^1/2 e^{-2 pi i x} - int_1/2^1 e^{-2 pi i x} = -2i/pi
    expected = np.array([[0.0, 2 / math.pi], [1.0, 0.0]])
    assert np.max(np.abs(np.abs(U) - expected)) < 1e-12
    assert c_nm(assemble(haar, haar_scheme, 2, 2)) == pytest.approx(2 / math.pi, abs=1e-12)


def test_assemble_rejects_bad_input(db4):
    with pytest.raises(ValueError):
        assemble(db4, SamplingScheme.for_family(db4), 0, 4)
    from gsrecon.sampling import SchemeError

    with pytest.raises(SchemeError):
        assemble(db4, SamplingScheme(1, 0, 1), 4, 4)


@pytest.mark.parametrize("name", ["haar", "db4", "db6"])
def test_column_norms_bounded(name):
    fam = make_family(name)
    U = assemble(fam, SamplingScheme.for_family(fam), 40, 200).U
    norms = np.linalg.norm(U, axis=0)
    assert np.all(norms <= 1 + 1e-10)


def test_identity_block_gives_one():
    p = assemble(make_family("haar"), SamplingScheme(1, 0, 1), 1, 1)
    assert c_nm(replace(p, U=np.eye(3))) == 1.0


def test_rank_deficient_returns_zero(haar, haar_scheme):
    p = assemble(haar, haar_scheme, 8, 4)
    assert c_nm(p) == 0.0


@pytest.mark.parametrize("R", range(0, 9))
def test_haar_cnm_bounded_below(haar, haar_scheme, R):
    N = n_r(haar, R)
    assert c_nm(assemble(haar, haar_scheme, N, 2**R)) >= 2 / math.pi - 1e-12


def _inverse_power_sigma(U, iters=2000, seed=0):
    """sigma_min via power iteration on (U*U)^-1, no SVD involved."""
    G = U.conj().T @ U
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(G.shape[0]) + 0j
    lam = 0.0
    for _ in range(iters):
        w = np.linalg.solve(G, v)
        lam_new = np.linalg.norm(w) / np.linalg.norm(v)
        v = w / np.linalg.norm(w)
        if abs(lam_new - lam) < 1e-15 * lam_new:
            break
        lam = lam_new
    return 1 / math.sqrt(lam_new)


@pytest.mark.parametrize("name", ["haar", "db4"])
def test_cnm_matches_power_iteration(name):
    fam = make_family(name)
    p = assemble(fam, SamplingScheme.for_family(fam), 16, 32)
    assert abs(c_nm(p) - _inverse_power_sigma(p.U)) < 1e-8


def test_cnm_monotone_and_tends_to_one(db4, db4_scheme):
    for N in (4, 16, 64):
        big = assemble(db4, db4_scheme, N, 32 * N)
        vals = [c_nm(replace(big, M=M, U=big.rows(M))) for M in range(N, 32 * N + 1, max(1, N // 2))]
        assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))
        assert vals[-1] > 0.97


def test_perfectness_basis_vector(db4, db4_scheme):
    N = n_r(db4, 3)
    M = stable_sampling_rate(SsrQuery(db4, db4_scheme, THETA_DB4, N))
    e3 = np.zeros(N)
    e3[2] = 1.0
    v = synthesize_samples(db4_scheme, WaveletCombo(db4, e3), M)
    sol = solve(assemble(db4, db4_scheme, N, M), v)
    assert np.max(np.abs(sol.alpha - e3)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), N=st.integers(2, 30), extra=st.integers(0, 60))
def test_perfectness_random(seed, N, extra):
    fam = make_family("db4")
    scheme = SamplingScheme.for_family(fam)
    M = N + extra
    p = assemble(fam, scheme, N, M)
    sigma = c_nm(p)
    if sigma <= 1e-6:
        return
    rng = np.random.default_rng(seed)
    beta = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    sol = solve(p, synthesize_samples(scheme, WaveletCombo(fam, beta), M))
    assert np.max(np.abs(sol.alpha - beta)) <= 1e-8 * sol.kappa * max(1.0, np.max(np.abs(beta)))


def test_matches_normal_equations_oracle(db4, db4_scheme):
    rng = np.random.default_rng(7)
    p = assemble(db4, db4_scheme, 4, 8)
    y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    ref = np.linalg.solve(p.U.conj().T @ p.U, p.U.conj().T @ y)
    sol = solve(p, y)
    assert np.max(np.abs(sol.alpha - ref)) < 1e-8
    assert sol.kappa * sol.sigma_min == pytest.approx(1.0)


def test_residual_orthogonality(db4, db4_scheme):
    beta = np.arange(1, 400) ** -2.5
    p = assemble(db4, db4_scheme, 60, 200)
    v = synthesize_samples(db4_scheme, WaveletCombo(db4, beta), 200)
    sol = solve(p, v)
    g = p.U.conj().T @ (p.U @ sol.alpha - v.values)
    assert np.linalg.norm(g) <= 1e-9 * np.linalg.norm(v.values)
    assert sol.residual == pytest.approx(np.linalg.norm(p.U @ sol.alpha - v.values))


def test_noise_amplification_bound(db4, db4_scheme):
    rng = np.random.default_rng(3)
    for N, M in ((20, 40), (40, 120), (60, 100)):
        p = assemble(db4, db4_scheme, N, M)
        noise = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        noise *= 1e-3 / np.linalg.norm(noise)
        sol = solve(p, noise)
        assert np.linalg.norm(sol.alpha) <= 1e-3 / sol.sigma_min * (1 + 1e-10)


def test_ill_posed_is_reported(haar, haar_scheme):
    p = assemble(haar, haar_scheme, 8, 4)
    with pytest.raises(IllPosedError) as exc:
        solve(p, np.ones(4))
    assert exc.value.sigma_min == 0.0
    sol = solve(p, np.ones(4), allow_ill_posed=True)
    assert sol.method == "svd-ill-posed"
    assert math.isinf(sol.kappa)


def test_sample_length_mismatch(haar, haar_scheme):
    with pytest.raises(ValueError):
        solve(assemble(haar, haar_scheme, 2, 4), np.ones(3))


def test_solver_paths(db4):
    scheme = SamplingScheme.for_family(db4)
    well = solve(assemble(db4, scheme, 10, 70), np.ones(70))
    assert well.method == "qr"
    # sub-critical sampling: sigma_min lands between the rank cutoff and the SVD switch
    p = assemble(db4, scheme, n_r(db4, 4), 85)
    assert 1e-13 < c_nm(p) < 1e-8
    assert solve(p, np.ones(p.M)).method == "svd"


def test_reconstruction_error_examples():
    beta = np.array([1.0, 0.5, 0.25, 0.125])
    assert reconstruction_error(beta, beta[:2]) == pytest.approx(math.hypot(0.25, 0.125))
    assert reconstruction_error(beta[:2], beta[:2], N=4) == 0.0
    assert reconstruction_error(beta, beta[:2], N=4) == pytest.approx(math.hypot(0.25, 0.125))
    assert best_approx_error(beta, 4) == 0.0
    assert best_approx_error(beta, 10) == 0.0
    b = np.arange(1, 3001.0) ** -3
    expected = math.sqrt(sum(j**-6 for j in range(257, 3001)))
    assert best_approx_error(b, 256) == pytest.approx(expected, rel=1e-12)


def test_quasi_optimality(db4, db4_scheme):
    rng = np.random.default_rng(11)
    N = n_r(db4, 3)
    M = stable_sampling_rate(SsrQuery(db4, db4_scheme, THETA_DB4, N))
    p = assemble(db4, db4_scheme, N, M)
    for _ in range(20):
        alpha = rng.uniform(1.5, 3.5)
        beta = rng.choice([-1.0, 1.0], 400) * np.arange(1, 401.0) ** -alpha
        sol = solve(p, synthesize_samples(db4_scheme, WaveletCombo(db4, beta), M))
        ratio = reconstruction_error(beta, sol.alpha, N) / best_approx_error(beta, N)
        assert ratio <= THETA_DB4 + 1e-9


def test_reconstruction_error_against_quadrature(haar, haar_scheme):
    beta = np.array([1.0, -0.6, 0.3, 0.2, -0.15, 0.1, 0.05, -0.02])
    N, M = 4, 16
    sol = solve(assemble(haar, haar_scheme, N, M), synthesize_samples(haar_scheme, WaveletCombo(haar, beta), M))
    n = 14
    h = 2.0**-n
    x = h * (np.arange(2**n) + 0.5)
    diff = evaluate_expansion(haar, beta, x, levels=n + 4) - evaluate_expansion(haar, sol.alpha, x, levels=n + 4)
    brute = math.sqrt(h * float(np.sum(np.abs(diff) ** 2)))
    assert abs(brute - reconstruction_error(beta, sol.alpha, N)) < 1e-6


def test_rows_slice_nested(db4, db4_scheme):
    big = assemble(db4, db4_scheme, 8, 41)
    for M in (8, 9, 20, 41):
        assert np.array_equal(big.rows(M), assemble(db4, db4_scheme, 8, M).U)
    with pytest.raises(ValueError):
        big.rows(42)


def test_epsilon_half_haar_entries_scale(haar):
    s1 = SamplingScheme(1, 0, 1)
    s2 = SamplingScheme(Fraction(1, 2), 0, 2)
    # at eps = 1/2 the even rows coincide with eps = 1 rows up to sqrt(1/2)
    U1 = assemble(haar, s1, 4, 8).U
    U2 = assemble(haar, s2, 4, 16).U
    assert np.max(np.abs(U2[::2] - U1 / math.sqrt(2))) < 1e-14
