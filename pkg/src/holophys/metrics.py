"""Reconstruction-quality metrics: global SSIM, RMSE, ECC.

SSIM here is the single global-statistics form (no sliding window) with
the 8-bit constants c1 = 2.55^2 and c2 = 7.65^2; callers rescale inputs
to [0, 255] first. ECC is the real part of the normalized complex inner
product of mean-subtracted fields. evaluate() removes the global phase of
the reconstruction (multiply by exp(-i*theta) with theta the phase of the
mean-subtracted inner product against truth) before every metric, since
hologram data determine the object only up to a global phase.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateField, ShapeMismatch
from .field import ComplexField

SSIM_C1 = 2.55**2
SSIM_C2 = 7.65**2


@dataclass(frozen=True)
class MetricsReport:
    ssim_amp: float
    ssim_phase: float
    rmse_amp: float
    rmse_phase: float
    ecc: float

    def as_dict(self) -> dict:
        return {
            "ssim_amp": self.ssim_amp,
            "ssim_phase": self.ssim_phase,
            "rmse_amp": self.rmse_amp,
            "rmse_phase": self.rmse_phase,
            "ecc": self.ecc,
        }


def _paired(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def ssim_global(a, b) -> float:
    """Global-statistics SSIM; inputs should span an 8-bit [0, 255] range."""
    a, b = _paired(a, b)
    mu_a = a.mean()
    mu_b = b.mean()
    var_a = a.var()
    var_b = b.var()
    cov = ((a - mu_a) * (b - mu_b)).mean()
    num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2)
    den = (mu_a**2 + mu_b**2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(num / den)


def rmse(a, b) -> float:
    """Root mean squared difference."""
    a, b = _paired(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def _mean_subtracted(f: ComplexField) -> np.ndarray:
    return f.values - f.values.mean()


def ecc(recon: ComplexField, truth: ComplexField) -> float:
    """Real part of the normalized inner product of mean-subtracted fields.

    Sensitive to global phase by design: ecc(i*f, f) = 0, ecc(-f, f) = -1.
    """
    if recon.values.shape != truth.values.shape:
        raise ShapeMismatch("field shapes differ")
    a = _mean_subtracted(recon)
    b = _mean_subtracted(truth)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na <= 1e-12 or nb <= 1e-12:
        raise DegenerateField("field is constant after mean subtraction")
    return float(np.vdot(a, b).real / (na * nb))


def _rescale_to_truth(truth_img: np.ndarray, recon_img: np.ndarray):
    """Affine map sending the truth's [min, max] to [0, 255], applied to both.

    Anchoring the map to the truth keeps the gain independent of the
    reconstruction. A constant truth degenerates to the zero map.
    """
    lo = truth_img.min()
    hi = truth_img.max()
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    return (truth_img - lo) * scale, (recon_img - lo) * scale


def evaluate(recon: ComplexField, truth: ComplexField) -> MetricsReport:
    """All metrics after removing the reconstruction's global phase.

    Amplitude metrics compare moduli; phase metrics compare angles after
    snapping each reconstructed angle to the truth's 2*pi branch. SSIM
    inputs are rescaled by the truth's range to the 8-bit span.
    """
    if recon.values.shape != truth.values.shape:
        raise ShapeMismatch("field shapes differ")
    a = _mean_subtracted(recon)
    b = _mean_subtracted(truth)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na <= 1e-12 or nb <= 1e-12:
        raise DegenerateField("field is constant after mean subtraction")
    inner = np.vdot(b, a)  # sum(conj(truth_ms) * recon_ms)
    theta = float(np.angle(inner)) if abs(inner) > 0 else 0.0
    aligned = recon.values * np.exp(-1j * theta)

    amp_r = np.abs(aligned)
    amp_t = np.abs(truth.values)
    ph_r = np.angle(aligned)
    ph_t = np.angle(truth.values)
    ph_r = ph_r + 2.0 * np.pi * np.round((ph_t - ph_r) / (2.0 * np.pi))

    # ECC of the aligned reconstruction; alignment rotates the inner
    # product onto the real axis, so this is |inner| / (na * nb).
    ecc_val = float((inner * np.exp(-1j * theta)).real / (na * nb))

    return MetricsReport(
        ssim_amp=ssim_global(*_rescale_to_truth(amp_t, amp_r)),
        ssim_phase=ssim_global(*_rescale_to_truth(ph_t, ph_r)),
        rmse_amp=rmse(amp_r, amp_t),
        rmse_phase=rmse(ph_r, ph_t),
        ecc=ecc_val,
    )
