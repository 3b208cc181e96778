"""Core value types: optical grids, complex fields, and hologram stacks.

All lengths are micrometers. Fields are square N x N complex arrays in
row-major order with x = column index and y = row index. Hologram planes
store measured amplitudes (|field| at the sensor), never intensities.
Every type is immutable after construction; arrays are copied in and
marked read-only so instances are safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMean, ShapeMismatch

# Smallest |complex mean| that normalize_by_complex_mean will divide by.
EPS_NORM = 1e-8


@dataclass(frozen=True)
class OpticalGrid:
    """Uniform square sampling grid for a scalar optical field.

    The wavenumber k = 2*pi*refractive_index/wavelength is always derived,
    never stored. Grid size must be even (frequency-window embedding in the
    spectral layers assumes a symmetric band around DC).
    """

    n: int
    pitch: float
    wavelength: float
    refractive_index: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 8, got {self.n}")
        if not (math.isfinite(self.pitch) and self.pitch > 0):
            raise ValueError(f"pitch must be positive, got {self.pitch}")
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not (math.isfinite(self.refractive_index) and self.refractive_index >= 1):
            raise ValueError(
                f"refractive index must be >= 1, got {self.refractive_index}"
            )

    @property
    def k(self) -> float:
        """Wavenumber in the medium, radians per micrometer."""
        return 2.0 * math.pi * self.refractive_index / self.wavelength

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)


def _frozen_array(values, dtype, shape, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.shape != shape:
        raise ShapeMismatch(f"{what} must have shape {shape}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{what} contains non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ComplexField:
    """An N x N complex field sample bound to its grid."""

    grid: OpticalGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.values, np.complex128, self.grid.shape, "field values")
        object.__setattr__(self, "values", arr)


class HologramStack:
    """M measured hologram amplitudes with their axial distances z_1..z_M.

    Planes are (z, amplitude) pairs sharing one grid; amplitudes are
    nonnegative. Plane order is preserved as given.
    """

    __slots__ = ("grid", "planes")

    def __init__(self, grid: OpticalGrid, planes) -> None:
        if len(planes) < 1:
            raise ValueError("a hologram stack needs at least one plane")
        frozen = []
        for z, amp in planes:
            z = float(z)
            if not math.isfinite(z):
                raise ValueError(f"plane distance must be finite, got {z}")
            arr = _frozen_array(amp, np.float64, grid.shape, "hologram amplitude")
            if arr.min() < 0:
                raise ValueError("hologram amplitudes must be nonnegative")
            frozen.append((z, arr))
        self.grid = grid
        self.planes = tuple(frozen)

    @property
    def m(self) -> int:
        return len(self.planes)

    @property
    def zs(self) -> tuple[float, ...]:
        return tuple(z for z, _ in self.planes)

    def amplitudes(self) -> np.ndarray:
        """Planes stacked into one (M, n, n) array (a fresh copy)."""
        return np.stack([amp for _, amp in self.planes])

    def sorted_by_z(self) -> "HologramStack":
        """The same stack with planes reordered by ascending z."""
        order = sorted(range(self.m), key=lambda i: self.planes[i][0])
        if order == list(range(self.m)):
            return self
        return HologramStack(self.grid, [self.planes[i] for i in order])

    def __repr__(self) -> str:
        return f"HologramStack(n={self.grid.n}, zs={self.zs})"


def from_amp_phase(amplitude, phase, grid: OpticalGrid) -> ComplexField:
    """Build the field amplitude * exp(i*phase) on the given grid."""
    amp = np.asarray(amplitude, dtype=np.float64)
    ph = np.asarray(phase, dtype=np.float64)
    if amp.shape != grid.shape or ph.shape != grid.shape:
        raise ShapeMismatch(
            f"amplitude/phase must have shape {grid.shape}, "
            f"got {amp.shape} and {ph.shape}"
        )
    if not (np.isfinite(amp).all() and np.isfinite(ph).all()):
        raise ValueError("amplitude/phase contain non-finite entries")
    if amp.min() < 0:
        raise ValueError("amplitude must be nonnegative")
    return ComplexField(grid, amp * np.exp(1j * ph))


def complex_mean(f: ComplexField) -> complex:
    """Arithmetic mean of all field entries."""
    return complex(np.mean(f.values))


def normalize_by_complex_mean(f: ComplexField, eps: float = EPS_NORM) -> ComplexField:
    """Divide the field by its complex mean so the result has mean 1+0i."""
    mu = complex(np.mean(f.values))
    if abs(mu) <= eps:
        raise DegenerateMean(f"|complex mean| = {abs(mu):.3e} <= {eps:.3e}")
    return ComplexField(f.grid, f.values / mu)


def energy(f: ComplexField) -> float:
    """Total field energy, sum of squared moduli."""
    return float(np.vdot(f.values, f.values).real)
