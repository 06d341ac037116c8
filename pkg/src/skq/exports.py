"""Byte-stable CSV and PGM writers.

Every file starts with a comment line carrying the tool version and the
SHA-256 of the configuration that produced it.  Floats use 17 significant
digits and lines end with LF, so identical inputs give identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import __version__
from .quasienergy import SampledField, grid_points

TIMESERIES_HEADER = "n,population_up,coherence,entropy_nats,rho_re_00,rho_re_01,rho_im_01,rho_re_11"
FIELD_HEADER = "i,j,theta1,theta2,value,valid"


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def header_comment(config_hash: str) -> str:
    return f"# skq {__version__} config-sha256={config_hash}"


def _write(path, lines):
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def write_timeseries(path, series, config_hash):
    lines = [header_comment(config_hash), TIMESERIES_HEADER]
    for k in range(len(series)):
        rho = series.rho[k]
        row = [
            str(int(series.n[k])),
            fmt(series.population_up[k]),
            fmt(series.coherence[k]),
            fmt(series.entropy_nats[k]),
            fmt(rho[0, 0].real),
            fmt(rho[0, 1].real),
            fmt(rho[0, 1].imag),
            fmt(rho[1, 1].real),
        ]
        lines.append(",".join(row))
    _write(path, lines)


def write_field(path, values, valid, config_hash):
    """Row-major (i outer, j inner) dump of a real G x G array."""
    values = np.asarray(values, dtype=float)
    valid = np.asarray(valid, dtype=bool)
    G = values.shape[0]
    pts = grid_points(G)
    lines = [header_comment(config_hash), FIELD_HEADER]
    for i in range(G):
        for j in range(G):
            ok = bool(valid[i, j]) and np.isfinite(values[i, j])
            lines.append(
                f"{i},{j},{fmt(pts[i, j, 0])},{fmt(pts[i, j, 1])},"
                f"{fmt(values[i, j]) if ok else 'nan'},{int(ok)}"
            )
    _write(path, lines)


def pgm_lines(values, valid, config_hash):
    """Plain P2 image: pixel = round(255 value) on valid cells, 0 elsewhere.

    Columns run over i (theta1); rows over j (theta2) with j = G - 1 on top,
    so the image has the usual orientation of a phase portrait.
    """
    values = np.asarray(values, dtype=float)
    valid = np.asarray(valid, dtype=bool) & np.isfinite(values)
    G = values.shape[0]
    px = np.where(valid, np.rint(255 * np.clip(np.nan_to_num(values), 0.0, 1.0)), 0).astype(int)
    lines = ["P2", header_comment(config_hash), f"{G} {G}", "255"]
    for j in range(G - 1, -1, -1):
        lines.append(" ".join(str(px[i, j]) for i in range(G)))
    return lines


def write_pgm(path, values, valid, config_hash):
    _write(path, pgm_lines(values, valid, config_hash))


def write_occupation(base: Path, f: SampledField, config_hash, stem="field"):
    occ = f.occupation()
    write_field(base / f"{stem}.csv", occ, f.valid, config_hash)
    write_pgm(base / f"{stem}.pgm", occ, f.valid, config_hash)
    return [base / f"{stem}.csv", base / f"{stem}.pgm"]


def write_rows(path, header, rows, config_hash):
    lines = [header_comment(config_hash), header]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else fmt(c) for c in row))
    _write(path, lines)
