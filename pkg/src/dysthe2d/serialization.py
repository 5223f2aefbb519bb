"""On-disk formats: binary fields, history directories, structured text.

Field file layout: header of five little-endian 64-bit values (nx, ny as
integers; lx, ly as floats; representation flag 0=physical 1=spectral),
followed by row-major interleaved re/im float64 pairs.

A FieldHistory is a directory of per-snapshot field files plus a `manifest`
structured-text file recording (t0, dt, count).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .spectral import PHYSICAL, SPECTRAL, EnvelopeField, SpectralGrid

_HEADER = struct.Struct("<qqddq")


def write_field(f: EnvelopeField, path: str | Path) -> None:
    path = Path(path)
    flag = 0 if f.representation == PHYSICAL else 1
    header = _HEADER.pack(f.grid.nx, f.grid.ny, f.grid.lx, f.grid.ly, flag)
    inter = np.empty((f.grid.nx, f.grid.ny, 2), dtype="<f8")
    inter[..., 0] = f.data.real
    inter[..., 1] = f.data.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(inter.tobytes())


def read_field(path: str | Path) -> EnvelopeField:
    path = Path(path)
    raw = path.read_bytes()
    nx, ny, lx, ly, flag = _HEADER.unpack_from(raw)
    if flag not in (0, 1):
        raise ValueError(f"bad representation flag {flag} in {path}")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != 2 * nx * ny:
        raise ValueError(f"truncated field file {path}")
    body = body.reshape(nx, ny, 2)
    data = body[..., 0] + 1j * body[..., 1]
    grid = SpectralGrid(int(nx), int(ny), float(lx), float(ly))
    return EnvelopeField(grid, PHYSICAL if flag == 0 else SPECTRAL, data)


# ---------------------------------------------------------------------------
# structured text: flat `key = value` records, one per line

def write_record(pairs: dict, path: str | Path) -> None:
    lines = [f"{k} = {_fmt(v)}" for k, v in pairs.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_record(path: str | Path) -> dict:
    out: dict = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        out[key.strip()] = _parse(val.strip())
    return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    if v in ("True", "False"):
        return v == "True"
    return v


# ---------------------------------------------------------------------------
# histories

def write_history(history, dirpath: str | Path) -> None:
    from .propagator import FieldHistory  # local import to avoid a cycle
    assert isinstance(history, FieldHistory)
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    for i, snap in enumerate(history.snapshots):
        write_field(snap, d / f"snapshot_{i:06d}.field")
    write_record({"t0": history.t0, "dt": history.dt,
                  "count": len(history.snapshots)}, d / "manifest")


def read_history(dirpath: str | Path):
    from .propagator import FieldHistory
    d = Path(dirpath)
    man = read_record(d / "manifest")
    snaps = [read_field(d / f"snapshot_{i:06d}.field")
             for i in range(int(man["count"]))]
    return FieldHistory(t0=float(man["t0"]), dt=float(man["dt"]),
                        snapshots=tuple(snaps))


def write_csv(path: str | Path, columns: list[str], rows) -> None:
    """Deterministic CSV: repr() floats so identical runs are byte-identical."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
