"""Angular-spectrum free-space propagation and the hologram forward model.

The transfer function over FFT-ordered angular frequencies (xi, eta) in
radians per micrometer is

    H(xi, eta; z) = exp(i * z * sqrt(k^2 - xi^2 - eta^2))   if xi^2 + eta^2 < k^2
                    0                                        otherwise

with xi_u = 2*pi*u' / (n * pitch), u' the signed FFT frequency index.
FFTs use the unitary convention throughout, so the adjoint of propagation
is propagation with the conjugated transfer function and no extra
constants, and energy is conserved in the passband.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .field import ComplexField, HologramStack, OpticalGrid

# Read-mostly transfer-function cache. Bounded crudely: sweeps with many
# distinct z values would otherwise grow it without limit.
_TF_CACHE: dict = {}
_TF_CACHE_MAX = 128
_TF_LOCK = threading.Lock()


def _freq_sq(grid: OpticalGrid) -> np.ndarray:
    f = 2.0 * math.pi * np.fft.fftfreq(grid.n, d=grid.pitch)
    return f[:, None] ** 2 + f[None, :] ** 2


def transfer_values(grid: OpticalGrid, z: float) -> np.ndarray:
    """Cached transfer-function array for (grid, z); read-only."""
    z = float(z)
    key = (grid.n, grid.pitch, grid.wavelength, grid.refractive_index, z)
    h = _TF_CACHE.get(key)
    if h is not None:
        return h
    rho2 = _freq_sq(grid)
    k2 = grid.k**2
    kz = np.sqrt(np.maximum(k2 - rho2, 0.0))
    h = np.exp(1j * z * kz)
    h[rho2 >= k2] = 0.0
    h.setflags(write=False)
    with _TF_LOCK:
        if len(_TF_CACHE) >= _TF_CACHE_MAX:
            _TF_CACHE.clear()
        _TF_CACHE[key] = h
    return h


@dataclass(frozen=True)
class TransferFunction:
    """Angular-spectrum transfer function sampled on a grid's frequencies."""

    grid: OpticalGrid
    z: float
    values: np.ndarray


def transfer_function(grid: OpticalGrid, z: float) -> TransferFunction:
    return TransferFunction(grid, float(z), transfer_values(grid, z))


def _apply_transfer(values: np.ndarray, h: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(np.fft.fft2(values, norm="ortho") * h, norm="ortho")


def propagate(f: ComplexField, z: float) -> ComplexField:
    """Propagate the field by a signed axial distance z (micrometers)."""
    return ComplexField(f.grid, _apply_transfer(f.values, transfer_values(f.grid, z)))


def adjoint_propagate(f: ComplexField, z: float) -> ComplexField:
    """Exact adjoint of propagate(., z) under the standard inner product.

    With the unitary FFT convention this is propagation with the
    conjugated transfer function, which equals propagate(., -z) on the
    passband (both zero the evanescent band).
    """
    h = np.conj(transfer_values(f.grid, z))
    return ComplexField(f.grid, _apply_transfer(f.values, h))


def band_limit(f: ComplexField) -> ComplexField:
    """Zero all evanescent frequencies (propagate by z = 0)."""
    return propagate(f, 0.0)


def simulate_hologram_stack(
    obj: ComplexField,
    zs,
    noise_sigma: float = 0.0,
    seed=0,
) -> HologramStack:
    """Simulate in-line hologram amplitudes |propagate(obj, z) + eps|.

    eps is i.i.d. circular complex Gaussian noise added to the complex
    field before the modulus, with per-component standard deviation
    noise_sigma. Identical seeds give bit-identical stacks.
    """
    zs = [float(z) for z in zs]
    if not zs:
        raise DataError("simulate_hologram_stack needs at least one plane distance")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    rng = np.random.default_rng(seed)
    n = obj.grid.n
    planes = []
    for z in zs:
        u = _apply_transfer(obj.values, transfer_values(obj.grid, z))
        if noise_sigma > 0:
            u = u + noise_sigma * (
                rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            )
        planes.append((z, np.abs(u)))
    return HologramStack(obj.grid, planes)


def sigma_for_snr_db(mean_amplitude: float, snr_db: float) -> float:
    """Per-component noise sigma giving the target amplitude SNR in dB.

    SNR is defined against the complex noise RMS, |eps|_rms = sigma*sqrt(2):
    snr_db = 20*log10(mean_amplitude / (sigma*sqrt(2))).
    """
    if mean_amplitude <= 0:
        raise ValueError("mean_amplitude must be positive")
    return float(mean_amplitude) * 10.0 ** (-snr_db / 20.0) / math.sqrt(2.0)
