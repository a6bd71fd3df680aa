"""Binary dump of a :class:`SpinState`.

Layout, little-endian::

    magic    4s   b"XYCS"
    version  u4   1
    N        u4
    sector   i4   n_up, or -1 for the full 2^N space
    bc       u4   0 open, 1 periodic
    energy   f8
    dim      u8
    data     dim * f8 coefficients in basis order (ascending bit pattern)
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ParameterError
from .basis import BOUNDARIES, spin_basis
from .states import SpinState

MAGIC = b"XYCS"
VERSION = 1
HEADER = struct.Struct("<4sIIiIdQ")


def save_state(state: SpinState, path) -> None:
    sector = -1 if state.basis.n_up is None else state.basis.n_up
    header = HEADER.pack(MAGIC, VERSION, state.N, sector, BOUNDARIES.index(state.bc),
                         state.energy, state.basis.dim)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.asarray(state.vector, dtype="<f8").tobytes())


def load_state(path) -> SpinState:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise ParameterError(f"{path}: file too short for a state header")
    magic, version, N, sector, bc, energy, dim = HEADER.unpack_from(raw)
    if magic != MAGIC or version != VERSION:
        raise ParameterError(f"{path}: not a version-{VERSION} state dump")
    basis = spin_basis(N, None if sector < 0 else sector)
    if basis.dim != dim or len(raw) != HEADER.size + 8 * dim:
        raise ParameterError(f"{path}: payload size does not match header")
    vector = np.frombuffer(raw, dtype="<f8", offset=HEADER.size).astype(float)
    return SpinState(N, BOUNDARIES[bc], basis, vector, energy)
