"""Multi-blade coordinate (Coleman) transform for a three-bladed rotor.

Azimuth ``psi = 0`` is blade-vertical-upright and increases in the direction
of rotation. All angles are in radians. Every function broadcasts over
leading dimensions: a blade quantity is any array whose last axis has
length 3. Single samples come back as named tuples, batches as ``(..., 3)``
arrays.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError

TWO_PI = 2.0 * np.pi
BLADE_SPACING = TWO_PI / 3.0


class BladeAzimuths(NamedTuple):
    psi_1: float
    psi_2: float
    psi_3: float

    @classmethod
    def from_reference(cls, psi_1: float) -> "BladeAzimuths":
        """Equally spaced azimuths with blade 1 at ``psi_1``."""
        return cls(psi_1, psi_1 + BLADE_SPACING, psi_1 + 2.0 * BLADE_SPACING)

    def normalized(self) -> "BladeAzimuths":
        return BladeAzimuths(*np.mod(np.asarray(self, dtype=float), TWO_PI))


class BladeVector(NamedTuple):
    v_1: float
    v_2: float
    v_3: float


class FixedFrameVector(NamedTuple):
    collective: float
    tilt: float
    yaw: float


def _triplet(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 3:
        raise InvalidInputError(f"{name} must have a trailing axis of length 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def _pack(arr: np.ndarray, kind):
    if arr.ndim == 1:
        return kind(*(float(v) for v in arr))
    return arr


def blade_azimuths(psi_1) -> np.ndarray:
    """Azimuths of all three blades for blade-1 azimuth(s) ``psi_1``; shape (..., 3)."""
    psi_1 = np.asarray(psi_1, dtype=float)
    return psi_1[..., None] + BLADE_SPACING * np.arange(3)


def forward_mbc(azimuths, blades) -> FixedFrameVector:
    """Project rotating-frame blade quantities onto collective, tilt and yaw.

    Applies ``T(psi) = 2/3 * [[0.5]*3, cos(psi_b), sin(psi_b)]``.
    """
    psi = _triplet(azimuths, "azimuths")
    v = _triplet(blades, "blades")
    psi, v = np.broadcast_arrays(psi, v)
    fixed = (2.0 / 3.0) * np.stack(
        [0.5 * v.sum(axis=-1), (v * np.cos(psi)).sum(axis=-1), (v * np.sin(psi)).sum(axis=-1)],
        axis=-1,
    )
    return _pack(fixed, FixedFrameVector)


def inverse_mbc(azimuths, fixed) -> BladeVector:
    """Per-blade values ``collective + tilt*cos(psi_b) + yaw*sin(psi_b)``."""
    psi = _triplet(azimuths, "azimuths")
    f = _triplet(fixed, "fixed")
    collective, tilt, yaw = (f[..., i : i + 1] for i in range(3))
    blades = collective + tilt * np.cos(psi) + yaw * np.sin(psi)
    return _pack(blades, BladeVector)


def is_equally_spaced(azimuths, tol: float = 1e-9) -> bool:
    if tol < 0:
        raise InvalidInputError("tol must be non-negative")
    psi = _triplet(azimuths, "azimuths")
    if psi.ndim != 1:
        raise InvalidInputError("is_equally_spaced expects a single azimuth triplet")
    steps = np.diff(psi) - BLADE_SPACING
    wrapped = np.mod(steps + np.pi, TWO_PI) - np.pi
    return bool(np.all(np.abs(wrapped) <= tol))
