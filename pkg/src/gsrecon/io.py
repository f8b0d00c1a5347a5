"""CSV/JSON artifacts.  Every CSV starts with a ``# {json}`` provenance line."""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .sampling import SampleVector


class MalformedFileError(ValueError):
    pass


def parse_number(text) -> Fraction | float:
    """Parse ``"1/13"``, ``"1/0.684"``, ``"0.5"`` or ``"pi/2"``-style inputs; rationals stay exact."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        return text
    s = str(text).strip().lower().replace(" ", "")
    if "pi" in s:
        num, _, den = s.partition("/")
        mult = num.replace("*", "").replace("pi", "") or "1"
        val = float(Fraction(mult)) * math.pi
        return val / float(Fraction(den)) if den else val
    try:
        # Fraction("1/0.684") is rejected, so each side is parsed on its own
        parts = [Fraction(t) for t in s.split("/")]
        if len(parts) > 2:
            raise ValueError("more than one '/'")
        return parts[0] / parts[1] if len(parts) == 2 else parts[0]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse number {text!r}") from exc


def number_to_json(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return x


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def provenance(command: str, config: dict) -> dict:
    return {
        "artifact": "gsrecon",
        "version": __version__,
        "command": command,
        "config": {k: number_to_json(v) for k, v in config.items()},
    }


def write_csv_stream(fh, header: dict, columns, rows) -> None:
    fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def write_csv(path, header: dict, columns, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        write_csv_stream(fh, header, columns, rows)


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            first = fh.readline()
            if not first.startswith("#"):
                raise MalformedFileError(f"{path}: missing '# {{json}}' header line")
            header = json.loads(first[1:])
            reader = csv.reader(fh)
            columns = next(reader)
            rows = [r for r in reader if r]
    except (OSError, json.JSONDecodeError, StopIteration, UnicodeDecodeError) as exc:
        raise MalformedFileError(f"{path}: {exc}") from exc
    return header, columns, rows


SAMPLE_COLUMNS = ["l", "re", "im"]


def write_samples(path, v: SampleVector, extra: dict | None = None) -> None:
    header = {
        "epsilon": number_to_json(v.epsilon),
        "T1": number_to_json(v.T1),
        "T2": number_to_json(v.T2),
        "M": v.M,
        "noise_norm": v.noise_norm,
        "seed": v.seed,
        "quadrature_error": v.quadrature_error,
    }
    if extra:
        header.update(extra)
    rows = [(int(l), z.real, z.imag) for l, z in zip(v.indices, v.values)]
    write_csv(path, header, SAMPLE_COLUMNS, rows)


def read_samples(path) -> SampleVector:
    header, columns, rows = read_csv(path)
    if columns != SAMPLE_COLUMNS:
        raise MalformedFileError(f"{path}: expected columns {SAMPLE_COLUMNS}, got {columns}")
    try:
        M = int(header["M"])
        eps = parse_number(header["epsilon"])
        T1, T2 = float(header["T1"]), float(header["T2"])
        ls = np.array([int(r[0]) for r in rows])
        vals = np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
    except (KeyError, ValueError, IndexError) as exc:
        raise MalformedFileError(f"{path}: {exc}") from exc
    if len(vals) != M:
        raise MalformedFileError(f"{path}: header says M={M} but found {len(vals)} rows")
    expected = np.arange(-(M // 2), (M + 1) // 2)
    if not np.array_equal(ls, expected):
        raise MalformedFileError(f"{path}: sample indices must run from {-(M // 2)} to {(M + 1) // 2 - 1}")
    return SampleVector(
        vals, eps, T1, T2,
        noise_norm=float(header.get("noise_norm") or 0.0),
        seed=header.get("seed"),
        quadrature_error=float(header.get("quadrature_error") or 0.0),
    )


def solution_to_json(problem, solution, extra: dict | None = None) -> dict:
    out = {
        "N": problem.N,
        "M": problem.M,
        "epsilon": number_to_json(problem.scheme.epsilon),
        "family": problem.family.name,
        "sigma_min": solution.sigma_min,
        "kappa": solution.kappa if math.isfinite(solution.kappa) else None,
        "residual": solution.residual,
        "method": solution.method,
        "alpha": [[float(z.real), float(z.imag)] for z in np.asarray(solution.alpha, dtype=complex)],
    }
    if extra:
        out.update(extra)
    return out


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def dump_matrix(path, problem) -> None:
    """Entry-wise dump ``(row, col, l, re, im)`` of ``U`` for external verification."""
    ls = np.arange(-(problem.M // 2), (problem.M + 1) // 2)
    U = problem.U

    def rows():
        for i in range(U.shape[0]):
            for j in range(U.shape[1]):
                z = U[i, j]
                yield i, j + 1, int(ls[i]), z.real, z.imag

    header = {"N": problem.N, "M": problem.M, "family": problem.family.name,
              "epsilon": number_to_json(problem.scheme.epsilon)}
    write_csv(path, header, ["row", "position", "l", "re", "im"], rows())
