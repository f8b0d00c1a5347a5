import json
import math
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from gsrecon import experiments as ex
from gsrecon.cli import main
from gsrecon.engine import best_approx_error, reconstruction_error
from gsrecon.io import (
    MalformedFileError,
    parse_number,
    read_csv,
    read_samples,
    write_csv,
    write_samples,
)
from gsrecon.sampling import SampleVector, SamplingScheme, WaveletCombo, add_noise, synthesize_samples
from gsrecon.ssr import SsrQuery, stable_sampling_rate
from gsrecon.wavelets import make_family, n_r


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    header = json.loads(lines[0][2:])
    cols = lines[1].split(",")
    rows = [dict(zip(cols, ln.split(","))) for ln in lines[2:]]
    return header, rows


def test_parse_number():
    assert parse_number("1/13") == Fraction(1, 13)
    assert parse_number("0.5") == Fraction(1, 2)
    assert parse_number("1/0.684") == Fraction(1000, 684)
    assert parse_number(" 2 ") == 2
    assert parse_number("pi/2") == math.pi / 2
    assert parse_number("2pi") == 2 * math.pi
    assert parse_number(0.25) == 0.25
    with pytest.raises(ValueError):
        parse_number("abc")
    with pytest.raises(ValueError):
        parse_number("1/0")
    with pytest.raises(ValueError):
        parse_number("1/2/3")


finite = st.floats(allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(rows=st.lists(st.tuples(st.integers(-10**12, 10**12), finite, finite), min_size=0, max_size=20))
def test_csv_roundtrip_lossless(tmp_path, rows):
    path = tmp_path / "t.csv"
    write_csv(path, {"k": 1}, ["n", "a", "b"], rows)
    header, cols, back = read_csv(path)
    assert header == {"k": 1} and cols == ["n", "a", "b"]
    assert [(int(r[0]), float(r[1]), float(r[2])) for r in back] == [tuple(r) for r in rows]


@pytest.mark.parametrize("M", [7, 8])
def test_samples_roundtrip(tmp_path, db4, M):
    s = SamplingScheme.for_family(db4)
    v = add_noise(synthesize_samples(s, WaveletCombo(db4, [0.3, -1.1, 0.7]), M), 1e-3, seed=5)
    path = tmp_path / "s.csv"
    write_samples(path, v)
    w = read_samples(path)
    assert np.array_equal(w.values, v.values)
    assert w.epsilon == Fraction(1, 7) and w.M == M
    assert w.noise_norm == v.noise_norm and w.seed == 5
    assert w.scheme == s


def test_read_samples_rejects_bad_files(tmp_path, haar):
    bad = tmp_path / "bad.csv"
    bad.write_text("l,re,im\n0,1,0\n")
    with pytest.raises(MalformedFileError):
        read_samples(bad)
    v = synthesize_samples(SamplingScheme.for_family(haar), WaveletCombo(haar, [1.0]), 4)
    good = tmp_path / "good.csv"
    write_samples(good, v)
    lines = good.read_text().splitlines()
    (tmp_path / "short.csv").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(MalformedFileError, match="M=4"):
        read_samples(tmp_path / "short.csv")
    (tmp_path / "cols.csv").write_text("\n".join([lines[0], "k,re,im"] + lines[2:]) + "\n")
    with pytest.raises(MalformedFileError, match="columns"):
        read_samples(tmp_path / "cols.csv")


def test_ssr_command_haar(capsys):
    code, out, _ = run(capsys, "ssr", "--family", "haar", "--epsilon", "1", "--theta", "pi/2", "--rmax", "7")
    assert code == 0
    header, rows = csv_rows(out)
    assert header["command"] == "ssr" and header["artifact"] == "gsrecon"
    assert [int(r["M_star"]) for r in rows] == [2**R for R in range(2, 8)]
    assert [int(r["N"]) for r in rows] == [2**R for R in range(2, 8)]


def test_ssr_command_literal_theta(capsys):
    """A theta typed with 8 digits sits just below pi/2, so Theta(N) moves up by one."""
    code, out, _ = run(capsys, "ssr", "--family", "haar", "--epsilon", "1", "--theta", "1.5707963",
                       "--rmax", "4")
    assert code == 0
    assert [int(r["M_star"]) for r in csv_rows(out)[1]] == [5, 9, 17]


def test_ssr_command_db6_decimal_epsilon(capsys):
    code, out, _ = run(capsys, "ssr", "--family", "db6", "--epsilon", "0.0769230769", "--theta", "1.43266",
                       "--rmax", "4")
    assert code == 0
    assert [int(r["M_star"]) for r in csv_rows(out)[1]] == [13 * 2**R for R in range(2, 5)]


def test_ssr_json_output(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert run(capsys, "ssr", "--family", "haar", "--theta", "2", "--N", "3,5", "--format", "json",
               "--out", out)[0] == 0
    obj = json.loads(out.read_text())
    assert obj["columns"][0] == "N" and [r["N"] for r in obj["rows"]] == [3, 5]


def test_nyquist_exit_code(capsys):
    code, _, err = run(capsys, "ssr", "--family", "db4", "--epsilon", "1/6", "--theta", "2")
    assert code == 2 and "Nyquist" in err


@pytest.mark.parametrize("argv", [
    ["ssr", "--family", "db5", "--theta", "2"],
    ["ssr", "--family", "haar", "--theta", "0.9"],
    ["ssr", "--family", "haar", "--theta", "2", "--rmin", "5", "--rmax", "3"],
    ["blowup", "--family", "haar", "--c", "1"],
    ["reconstruct"],
])
def test_invalid_parameters_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_cap_exit_code(capsys):
    code, _, err = run(capsys, "ssr", "--family", "db4", "--theta", "1.01", "--N", "40", "--search-cap", "60")
    assert code == 1 and "cap" in err


def test_malformed_file_exit_3(tmp_path, capsys):
    bad = tmp_path / "x.csv"
    bad.write_text("not a sample file\n")
    assert run(capsys, "reconstruct", "--samples", bad, "--N", "4")[0] == 3
    assert run(capsys, "reconstruct", "--samples", tmp_path / "missing.csv", "--N", "4")[0] == 3


def test_ill_posed_exit_and_override(tmp_path, capsys):
    path = tmp_path / "s.csv"
    assert run(capsys, "samples", "--family", "haar", "--M", "4", "--out", path)[0] == 0
    code, _, err = run(capsys, "reconstruct", "--samples", path, "--N", "8")
    assert code == 2 and "allow-ill-posed" in err
    code, out, _ = run(capsys, "reconstruct", "--samples", path, "--N", "8", "--allow-ill-posed",
                       "--grid-points", "33")
    assert code == 0 and json.loads(out)["kappa"] is None


def test_samples_and_reconstruct_roundtrip(tmp_path, capsys, db4):
    """Coefficients recovered through the files agree with the truth within theta times the tail."""
    theta = 1 / 0.684
    s = SamplingScheme.for_family(db4)
    N = n_r(db4, 3)
    M = stable_sampling_rate(SsrQuery(db4, s, theta, N))
    samples = tmp_path / "s.csv"
    assert run(capsys, "samples", "--family", "db4", "--M", M, "--alpha", "2.5", "--out", samples)[0] == 0
    sol = tmp_path / "a.json"
    grid = tmp_path / "g.csv"
    mat = tmp_path / "u.csv"
    code, _, _ = run(capsys, "reconstruct", "--samples", samples, "--family", "db4", "--N", N,
                     "--out", sol, "--grid-out", grid, "--grid-points", "257", "--dump-matrix", mat)
    assert code == 0
    obj = json.loads(sol.read_text())
    assert obj["N"] == N and obj["M"] == M and obj["epsilon"] == "1/7" and obj["method"] == "qr"
    assert obj["kappa"] * obj["sigma_min"] == pytest.approx(1.0)
    alpha = np.array([complex(re, im) for re, im in obj["alpha"]])
    beta = ex.decaying_coefficients(2.5)
    tail = best_approx_error(beta, N)
    assert np.linalg.norm(alpha - beta[:N]) <= reconstruction_error(beta, alpha, N) <= theta * tail
    header, cols, rows = read_csv(grid)
    assert cols[0] == "x" and len(rows) == 257 and header["command"] == "reconstruct"
    _, cols, rows = read_csv(mat)
    assert cols == ["row", "position", "l", "re", "im"] and len(rows) == M * N


def test_table_command_check_reports(capsys):
    code, out, err = run(capsys, "table", "--table", "2", "--check")
    _, rows = csv_rows(out)
    assert len(rows) == 6
    assert {r["family"] for r in rows} == {"db4", "haar"}
    assert err.count("PASS") + err.count("FAIL") == 12
    assert code == (1 if "FAIL" in err else 0)


def test_blowup_command(capsys):
    code, out, err = run(capsys, "blowup", "--family", "haar", "--epsilon", "1/2", "--c", "1.9")
    assert code == 0
    _, rows = csv_rows(out)
    assert [int(r["R"]) for r in rows] == [4, 5, 6, 7, 8]
    assert "exponential=True" in err


def test_verify_passes_and_is_deterministic(capsys):
    code1, out1, _ = run(capsys, "verify", "--quick")
    code2, out2, _ = run(capsys, "verify", "--quick")
    assert code1 == code2 == 0
    assert out1 == out2
    assert out1.rstrip().endswith("checks passed")


def test_verify_full_subprocess_byte_identical():
    cmd = [sys.executable, "-m", "gsrecon", "verify"]
    a = subprocess.run(cmd, capture_output=True, check=False)
    b = subprocess.run(cmd, capture_output=True, check=False)
    assert a.returncode == 0, a.stdout.decode()
    assert a.stdout == b.stdout
    assert b"FAIL" not in a.stdout


def test_verify_names_tampered_filter(capsys):
    code, out, _ = run(capsys, "verify", "--quick", "--perturb-tap", "db4:2:1e-3")
    assert code == 1
    fails = [ln for ln in out.splitlines() if ln.startswith("FAIL")]
    assert any("filter/db4" in ln for ln in fails)
    assert not any("haar" in ln or "db6" in ln for ln in fails)


def test_verify_bad_perturbation(capsys):
    assert run(capsys, "verify", "--perturb-tap", "db4:9:1e-3")[0] == 2
    assert run(capsys, "verify", "--perturb-tap", "nonsense")[0] == 2


def test_box_spikes_demo_gibbs():
    res = ex.box_spikes_demo()
    assert (res.N, res.M) == (512, 2048)
    over_fm = ex.gibbs_overshoot(res.x, res.f_M.real)
    over_gs = ex.gibbs_overshoot(res.x, res.f_gs.real)
    assert over_fm > 0.08
    assert over_gs < 0.10
    # N = 512 is admissible at theta = 1.2 with 2048 samples
    s = SamplingScheme(Fraction(1, 2), 0, 1)
    assert stable_sampling_rate(SsrQuery(make_family("haar"), s, 1.2, 512)) <= 2048


def test_bandlimited_demo():
    res = ex.bandlimited_demo(n_grid=801)
    assert np.max(np.abs(res.f_gs - res.f)) < 1e-4
    assert res.extra["ramp_error_max"] < 1e-2
    # the truncated series interpolates the transform at the sample frequencies
    eps = res.epsilon
    ls = np.arange(-8, 8)
    v = SampleVector(math.sqrt(eps) * ex.bandlimited_fourier(-2 * math.pi * float(eps) * ls), eps, 0, 1)
    x = -2 * math.pi * float(eps) * ls
    assert np.max(np.abs(ex.shannon_series(v, x) - ex.bandlimited_fourier(x))) < 1e-14


def test_bandlimited_transform_value_at_zero():
    assert ex.bandlimited_fourier(np.array([0.0]))[0] == pytest.approx(1.5)
    # continuity through the removable singularity
    assert ex.bandlimited_fourier(np.array([1e-6]))[0] == pytest.approx(1.5, abs=1e-5)
