"""Post-processing helpers for simulated signals."""
from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


def power_spectrum(x, dt: float):
    """One-sided periodogram ``|X_k|^2`` of a real signal and its bin frequencies."""
    x = np.asarray(x, dtype=float)
    spec = np.fft.rfft(x)
    return np.fft.rfftfreq(len(x), dt), np.abs(spec) ** 2


def bin_containing(freq: float, n: int, dt: float) -> int:
    """Index of the FFT bin whose resolution cell contains ``freq``."""
    return int(np.floor(freq * n * dt + 0.5))


def dominant_bin(x, dt: float, include_dc: bool = False) -> int:
    _, power = power_spectrum(x, dt)
    if not include_dc:
        power = power.copy()
        power[0] = 0.0
    return int(np.argmax(power))


def coherent_length(n: int, dt: float, freq: float) -> int:
    """Largest sample count not above ``n`` that spans a whole number of cycles of ``freq``."""
    cycles = np.floor(n * dt * freq)
    if cycles < 1:
        raise InvalidInputError("record is shorter than one cycle of the target frequency")
    return int(round(cycles / (freq * dt)))


def bin_power_fraction(x, dt: float, freq: float, coherent: bool = True) -> float:
    """Share of non-DC spectral power in the bin containing ``freq``.

    With ``coherent`` the record is first trimmed to a whole number of cycles
    of ``freq`` so a pure tone is not smeared across neighbouring bins by the
    rectangular window.
    """
    x = np.asarray(x, dtype=float)
    if coherent:
        x = x[: coherent_length(len(x), dt, freq)]
    _, power = power_spectrum(x - x.mean(), dt)
    total = power[1:].sum()
    if total == 0:
        return 0.0
    return float(power[bin_containing(freq, len(x), dt)] / total)


def fit_sinusoid(t, x, freq: float):
    """Least-squares ``offset + A sin(2 pi f t + phase)``; returns (A, phase [rad], offset)."""
    t = np.asarray(t, dtype=float)
    w = 2.0 * np.pi * freq
    basis = np.column_stack([np.sin(w * t), np.cos(w * t), np.ones_like(t)])
    (a_sin, a_cos, offset), *_ = np.linalg.lstsq(basis, np.asarray(x, dtype=float), rcond=None)
    return float(np.hypot(a_sin, a_cos)), float(np.arctan2(a_cos, a_sin)), float(offset)


def wrap_degrees(angle: float) -> float:
    """Wrap to (-180, 180]."""
    wrapped = np.mod(angle + 180.0, 360.0) - 180.0
    return 180.0 if wrapped == -180.0 else float(wrapped)


def upcrossing_times(t, x) -> np.ndarray:
    """Linearly interpolated times where ``x - mean(x)`` crosses zero upward."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float) - np.mean(x)
    idx = np.nonzero((x[:-1] < 0) & (x[1:] >= 0))[0]
    frac = -x[idx] / (x[idx + 1] - x[idx])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def mean_period(t, x) -> float:
    crossings = upcrossing_times(t, x)
    if len(crossings) < 2:
        raise InvalidInputError("need at least two upward crossings to estimate a period")
    return float(np.mean(np.diff(crossings)))


def signed_area(y, z) -> float:
    """Shoelace area of the closed polygon (y, z); positive when counterclockwise."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    return float(0.5 * np.sum(y * np.roll(z, -1) - np.roll(y, -1) * z))
