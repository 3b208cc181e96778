"""CFLD binary files: one complex field or hologram stack per file.

Layout:
  8-byte magic "CFLD\\x01\\0\\0\\0"
  u32 little-endian header length
  UTF-8 JSON header {kind, n, pitch_um, wavelength_um, refractive_index,
                     z_um (stacks only), dtype}
  payload: little-endian 64-bit floats, row-major

Fields use dtype "c64" (64-bit float components, re/im interleaved);
stacks use dtype "f64" with planes stored consecutively in z_um order.
Round trips are bit-exact for finite inputs.
"""
from __future__ import annotations

import json
import struct

import numpy as np

from .errors import DataError
from .field import ComplexField, HologramStack, OpticalGrid
from .ioutil import atomic_write_bytes, canonical_json

MAGIC = b"CFLD\x01\x00\x00\x00"


def _pack(header: dict, payload: bytes) -> bytes:
    hb = canonical_json(header).encode("utf-8")
    return MAGIC + struct.pack("<I", len(hb)) + hb + payload


def _grid_header(grid: OpticalGrid) -> dict:
    return {
        "n": grid.n,
        "pitch_um": grid.pitch,
        "wavelength_um": grid.wavelength,
        "refractive_index": grid.refractive_index,
    }


def field_bytes(f: ComplexField) -> bytes:
    header = {"kind": "field", "dtype": "c64", **_grid_header(f.grid)}
    return _pack(header, f.values.astype("<c16").tobytes())


def stack_bytes(s: HologramStack) -> bytes:
    header = {
        "kind": "stack",
        "dtype": "f64",
        "z_um": list(s.zs),
        **_grid_header(s.grid),
    }
    payload = b"".join(amp.astype("<f8").tobytes() for _, amp in s.planes)
    return _pack(header, payload)


def write_field(path, f: ComplexField) -> None:
    atomic_write_bytes(path, field_bytes(f))


def write_stack(path, s: HologramStack) -> None:
    atomic_write_bytes(path, stack_bytes(s))


def write(path, obj) -> None:
    if isinstance(obj, ComplexField):
        write_field(path, obj)
    elif isinstance(obj, HologramStack):
        write_stack(path, obj)
    else:
        raise DataError(f"cannot serialize {type(obj).__name__} as CFLD")


def read(path):
    """Load a CFLD file, returning a ComplexField or HologramStack."""
    with open(path, "rb") as fh:
        blob = fh.read()
    return from_bytes(blob, what=str(path))


def from_bytes(blob: bytes, what: str = "<bytes>"):
    if len(blob) < len(MAGIC) + 4 or blob[: len(MAGIC)] != MAGIC:
        raise DataError(f"{what}: not a CFLD file (bad magic)")
    (hlen,) = struct.unpack_from("<I", blob, len(MAGIC))
    hstart = len(MAGIC) + 4
    if hstart + hlen > len(blob):
        raise DataError(f"{what}: truncated header")
    try:
        header = json.loads(blob[hstart : hstart + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataError(f"{what}: malformed header ({e})") from e
    payload = blob[hstart + hlen :]
    try:
        grid = OpticalGrid(
            n=int(header["n"]),
            pitch=float(header["pitch_um"]),
            wavelength=float(header["wavelength_um"]),
            refractive_index=float(header.get("refractive_index", 1.0)),
        )
        kind = header["kind"]
        dtype = header["dtype"]
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"{what}: invalid header ({e})") from e
    n = grid.n
    if kind == "field":
        if dtype != "c64":
            raise DataError(f"{what}: field payload must be c64, got {dtype}")
        if len(payload) != n * n * 16:
            raise DataError(f"{what}: payload size mismatch for {n}x{n} field")
        values = np.frombuffer(payload, dtype="<c16").reshape(n, n)
        return ComplexField(grid, values)
    if kind == "stack":
        if dtype != "f64":
            raise DataError(f"{what}: stack payload must be f64, got {dtype}")
        zs = header.get("z_um")
        if not isinstance(zs, list) or not zs:
            raise DataError(f"{what}: stack header needs a nonempty z_um list")
        if len(payload) != len(zs) * n * n * 8:
            raise DataError(f"{what}: payload size mismatch for stack")
        flat = np.frombuffer(payload, dtype="<f8").reshape(len(zs), n, n)
        return HologramStack(grid, [(float(z), flat[i]) for i, z in enumerate(zs)])
    raise DataError(f"{what}: unknown kind {kind!r}")
