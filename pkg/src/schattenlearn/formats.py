"""Text formats: SVNOP operator files, SVNDATA datasets, key = value configs, CSV rows."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidInputError
from .operators import LinearOperator, as_operator, factorize


def fmt(x) -> str:
    """17-significant-digit float text (round-trips exactly); ints and bools pass through."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def write_operator(T, path) -> None:
    """Write ``T`` in the SVNOP v1 format (factored, numerically nonzero spectrum)."""
    F = factorize(as_operator(T))
    d_y, d_x = F.shape
    r = F.s.size
    lines = [f"SVNOP 1 {d_y} {d_x} {r}"]
    lines += [" ".join(fmt(v) for v in F.U[:, k]) for k in range(r)]
    lines.append(" ".join(fmt(v) for v in F.s))
    lines += [" ".join(fmt(v) for v in F.V[:, k]) for k in range(r)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_operator(path) -> LinearOperator:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise InvalidInputError(f"{path}: empty operator file")
    head = lines[0].split()
    if len(head) != 5 or head[:2] != ["SVNOP", "1"]:
        raise InvalidInputError(f"{path}: not an SVNOP v1 file")
    d_y, d_x, r = (int(v) for v in head[2:])
    if len(lines) != 1 + 2 * r + 1:
        raise InvalidInputError(f"{path}: expected {2 * r + 2} lines, found {len(lines)}")

    def row(i, n):
        vals = [float(v) for v in lines[i].split()]
        if len(vals) != n:
            raise InvalidInputError(f"{path}: line {i + 1} has {len(vals)} values, expected {n}")
        return vals

    U = np.array([row(1 + k, d_y) for k in range(r)]).T
    s = np.array(row(1 + r, r))
    V = np.array([row(2 + r + k, d_x) for k in range(r)]).T
    return LinearOperator.from_factors(U.reshape(d_y, r), s, V.reshape(d_x, r))


def write_dataset(xs, ys, path) -> None:
    xs = np.atleast_2d(xs)
    ys = np.atleast_2d(ys)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# SVNDATA 1 {xs.shape[0]} {xs.shape[1]} {ys.shape[1]}\n")
        for x, y in zip(xs, ys):
            fh.write(",".join(fmt(v) for v in np.concatenate([x, y])) + "\n")


def read_dataset(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        head = fh.readline().split()
        if len(head) != 6 or head[:3] != ["#", "SVNDATA", "1"]:
            raise InvalidInputError(f"{path}: not an SVNDATA 1 file")
        N, d_x, d_y = (int(v) for v in head[3:])
        body = [ln for ln in fh if ln.strip()]
    if len(body) != N:
        raise InvalidInputError(f"{path}: header says {N} rows, found {len(body)}")
    data = np.array([[float(v) for v in ln.split(",")] for ln in body]).reshape(N, -1)
    if data.shape[1] != d_x + d_y:
        raise InvalidInputError(f"{path}: rows have {data.shape[1]} values, expected {d_x + d_y}")
    return data[:, :d_x], data[:, d_x:]


def read_config(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{n}: missing key")
        if key in out:
            raise ConfigError(f"{path}:{n}: duplicate key {key!r}")
        out[key] = value
    return out


def parse_int_list(text: str) -> list[int]:
    """Comma list of integers or ranges: ``a..b`` (step 1) or ``a..b*k`` (geometric)."""
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        try:
            if ".." in tok:
                lo, rest = tok.split("..", 1)
                if "*" in rest:
                    hi, factor = rest.split("*", 1)
                    v, hi, factor = int(lo), int(hi), int(factor)
                    if factor < 2 or v < 1:
                        raise ValueError
                    while v <= hi:
                        out.append(v)
                        v *= factor
                else:
                    out.extend(range(int(lo), int(rest) + 1))
            else:
                out.append(int(tok))
        except ValueError:
            raise ConfigError(f"bad integer list item {tok!r}") from None
    if not out:
        raise ConfigError(f"empty integer list {text!r}")
    return out


def parse_float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None
    if not vals:
        raise ConfigError(f"empty number list {text!r}")
    return vals


def write_csv(path, header, rows, comments=()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
        for c in comments:
            fh.write(f"# {c}\n")
