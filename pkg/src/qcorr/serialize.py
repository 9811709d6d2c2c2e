"""JSON encoding of complex arrays as nested ``[re, im]`` pairs."""

from __future__ import annotations

from typing import Any

import numpy as np

from .errors import DimensionError, FormatError


def encode_complex(value: complex) -> list[float]:
    c = complex(value)
    return [float(c.real), float(c.imag)]


def encode_vector(v: np.ndarray) -> list[list[float]]:
    return [encode_complex(x) for x in np.asarray(v).ravel()]


def encode_matrix(m: np.ndarray) -> list[list[list[float]]]:
    m = np.asarray(m)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {m.shape}")
    return [[encode_complex(x) for x in row] for row in m]


def _decode_entry(entry: Any) -> complex:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        re, im = entry
        try:
            return complex(float(re), float(im))
        except (TypeError, ValueError) as exc:
            raise FormatError(f"complex entries must hold numbers, got {entry!r}") from exc
    raise FormatError(f"complex entries must be [re, im] pairs, got {entry!r}")


def decode_vector(data: Any) -> np.ndarray:
    if not isinstance(data, (list, tuple)):
        raise FormatError("vector must be a JSON array")
    return np.array([_decode_entry(e) for e in data], dtype=complex)


def decode_matrix(data: Any) -> np.ndarray:
    if not isinstance(data, (list, tuple)) or not data:
        raise FormatError("matrix must be a non-empty JSON array of rows")
    rows = [[_decode_entry(e) for e in row] for row in data]
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DimensionError("matrix rows have unequal lengths")
    return np.array(rows, dtype=complex)
