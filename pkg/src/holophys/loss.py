"""Physics-consistency loss (FDMAE + MSE + TV) and its analytic gradient.

For a candidate object field o and measured amplitude stack i_1..i_M at
distances z_1..z_M, predicted holograms are i_hat_m = |propagate(o, z_m)|
(noiseless forward model) and

    total = alpha * FDMAE + beta * MSE + gamma * TV

FDMAE and MSE are averaged over the M planes. FDMAE uses unitary FFTs and
a 2D Hann window rotated so its peak sits at DC. TV is anisotropic with
forward differences and zero difference at the last row/column; the
complex variant carries factor 1/(2*N^2) over four terms (x/y gradients
of real and imaginary parts), the phase variant 1/N^2 over two.

Gradients follow the Wirtinger convention g = dL/dRe + i*dL/dIm, so a
real-valued step do changes the loss by Re<g, do>. In phase-only mode the
object is exp(i*pi*p) for a real phase map p and the gradient is taken
with respect to p. Nonsmooth points (zero windowed-spectrum bins, zero
pre-modulus pixels, TV ties) use subgradient 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .field import ComplexField, HologramStack, OpticalGrid
from .propagation import _apply_transfer, transfer_values

_HANN_FFT_CACHE: dict[int, np.ndarray] = {}


@dataclass(frozen=True)
class LossWeights:
    """Term weights (alpha: FDMAE, beta: MSE, gamma: TV)."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("loss weights must be nonnegative")


# Defaults: FDMAE 0.1, MSE 1, TV 20.
DEFAULT_WEIGHTS = LossWeights(alpha=0.1, beta=1.0, gamma=20.0)


@dataclass(frozen=True)
class LossReport:
    """Per-term breakdown; total = alpha*fdmae + beta*mse + gamma*tv."""

    fdmae: float
    mse: float
    tv: float
    total: float

    def as_dict(self) -> dict:
        return {"fdmae": self.fdmae, "mse": self.mse, "tv": self.tv, "total": self.total}


def hann2d(n: int) -> np.ndarray:
    """Separable 2D Hann window in spatial order, peak at the center.

    w[x, y] = h(x)*h(y) with h(t) = 0.5*(1 - cos(2*pi*t/(n-1))).
    """
    if n < 2:
        raise ValueError("hann2d needs n >= 2")
    t = np.arange(n, dtype=np.float64)
    h = 0.5 * (1.0 - np.cos(2.0 * math.pi * t / (n - 1)))
    return np.outer(h, h)


def _hann_fft(n: int) -> np.ndarray:
    """Hann window rotated so its peak weights the DC frequency bin."""
    w = _HANN_FFT_CACHE.get(n)
    if w is None:
        w = np.fft.ifftshift(hann2d(n))
        w.setflags(write=False)
        _HANN_FFT_CACHE[n] = w
    return w


def _check_matched(pred: HologramStack, meas: HologramStack) -> None:
    if pred.grid != meas.grid:
        raise ShapeMismatch("stacks live on different grids")
    if pred.zs != meas.zs:
        raise ShapeMismatch(f"stacks disagree on planes: {pred.zs} vs {meas.zs}")


def fdmae(pred: HologramStack, meas: HologramStack) -> float:
    """Fourier-domain MAE of Hann-windowed spectra, averaged over planes."""
    _check_matched(pred, meas)
    n = pred.grid.n
    w = _hann_fft(n)
    acc = 0.0
    for (_, p), (_, q) in zip(pred.planes, meas.planes):
        d = np.fft.fft2(p - q, norm="ortho")
        acc += float(np.abs(w * d).sum()) / (n * n)
    return acc / pred.m


def mse(pred: HologramStack, meas: HologramStack) -> float:
    """Mean squared amplitude difference, averaged over planes."""
    _check_matched(pred, meas)
    acc = 0.0
    for (_, p), (_, q) in zip(pred.planes, meas.planes):
        acc += float(np.mean((p - q) ** 2))
    return acc / pred.m


def _tv_sum(r: np.ndarray) -> float:
    dx = np.abs(r[:, 1:] - r[:, :-1]).sum()
    dy = np.abs(r[1:, :] - r[:-1, :]).sum()
    return float(dx + dy)


def _tv_subgrad(r: np.ndarray) -> np.ndarray:
    """Subgradient of sum(|forward diffs|), zero at ties."""
    g = np.zeros_like(r)
    sx = np.sign(r[:, 1:] - r[:, :-1])
    g[:, 1:] += sx
    g[:, :-1] -= sx
    sy = np.sign(r[1:, :] - r[:-1, :])
    g[1:, :] += sy
    g[:-1, :] -= sy
    return g


def tv_complex(f: ComplexField) -> float:
    """Anisotropic TV over real and imaginary parts, factor 1/(2*N^2)."""
    n = f.grid.n
    v = f.values
    return (_tv_sum(v.real) + _tv_sum(v.imag)) / (2.0 * n * n)


def tv_phase(p) -> float:
    """Anisotropic TV of a real phase map, factor 1/N^2."""
    p = np.asarray(p, dtype=np.float64)
    return _tv_sum(p) / p.size


def _core(
    o_values: np.ndarray,
    grid: OpticalGrid,
    meas_amps: np.ndarray,
    zs,
    weights: LossWeights,
    mode: str,
    p_values: np.ndarray | None,
    want_grad: bool,
):
    """Shared loss/gradient kernel on raw arrays.

    o_values: complex object field (in phase-only mode, exp(i*pi*p)).
    meas_amps: (M, n, n) measured amplitudes matching zs.
    Returns (LossReport, grad or None); grad is complex Wirtinger in
    complex mode and real (w.r.t. the phase map) in phase-only mode.
    """
    n = grid.n
    m_planes = len(zs)
    w = _hann_fft(n)
    inv_n2 = 1.0 / (n * n)

    fdmae_acc = 0.0
    mse_acc = 0.0
    g_o = np.zeros((n, n), dtype=np.complex128) if want_grad else None
    for idx, z in enumerate(zs):
        h = transfer_values(grid, z)
        u = _apply_transfer(o_values, h)
        a = np.abs(u)
        e = a - meas_amps[idx]
        d = w * np.fft.fft2(e, norm="ortho")
        fdmae_acc += float(np.abs(d).sum()) * inv_n2
        mse_acc += float(np.mean(e * e))
        if want_grad:
            absd = np.abs(d)
            s = np.divide(d, absd, out=np.zeros_like(d), where=absd > 0)
            g_amp = (
                weights.alpha * inv_n2 * np.fft.ifft2(w * s, norm="ortho").real
                + weights.beta * (2.0 * inv_n2) * e
            ) / m_planes
            phase_u = np.divide(u, a, out=np.zeros_like(u), where=a > 0)
            g_o += _apply_transfer(g_amp * phase_u, np.conj(h))

    fdmae_val = fdmae_acc / m_planes
    mse_val = mse_acc / m_planes

    if mode == "complex":
        tv_val = (_tv_sum(o_values.real) + _tv_sum(o_values.imag)) / (2.0 * n * n)
    else:
        tv_val = _tv_sum(p_values) * inv_n2
    total = weights.alpha * fdmae_val + weights.beta * mse_val + weights.gamma * tv_val
    report = LossReport(fdmae=fdmae_val, mse=mse_val, tv=tv_val, total=total)
    if not want_grad:
        return report, None

    if mode == "complex":
        g_tv = _tv_subgrad(o_values.real) + 1j * _tv_subgrad(o_values.imag)
        grad = g_o + (weights.gamma / (2.0 * n * n)) * g_tv
    else:
        g_p = math.pi * (1j * o_values * np.conj(g_o)).real
        grad = g_p + (weights.gamma * inv_n2) * _tv_subgrad(p_values)
    return report, grad


def _as_output(output, meas: HologramStack, mode: str):
    """Normalize the output argument to (o_values, p_values)."""
    if mode == "complex":
        if not isinstance(output, ComplexField):
            raise ShapeMismatch("complex mode expects a ComplexField output")
        if output.grid != meas.grid:
            raise ShapeMismatch("output and measurement grids differ")
        return output.values, None
    if mode == "phase-only":
        p = np.asarray(output, dtype=np.float64)
        if p.shape != meas.grid.shape:
            raise ShapeMismatch(
                f"phase map must have shape {meas.grid.shape}, got {p.shape}"
            )
        return np.exp(1j * math.pi * p), p
    raise ValueError(f"unknown loss mode {mode!r}")


def total_loss(
    output,
    meas: HologramStack,
    weights: LossWeights = DEFAULT_WEIGHTS,
    mode: str = "complex",
) -> LossReport:
    """Physics-consistency loss of an output field (or phase map)."""
    o_values, p_values = _as_output(output, meas, mode)
    report, _ = _core(
        o_values, meas.grid, meas.amplitudes(), meas.zs, weights, mode, p_values, False
    )
    return report


def loss_gradient_wrt_field(
    output,
    meas: HologramStack,
    weights: LossWeights = DEFAULT_WEIGHTS,
    mode: str = "complex",
) -> np.ndarray:
    """Exact gradient of total_loss w.r.t. the output.

    Complex mode returns the Wirtinger gradient dL/dRe + i*dL/dIm; phase
    mode returns the real gradient w.r.t. the phase map.
    """
    o_values, p_values = _as_output(output, meas, mode)
    _, grad = _core(
        o_values, meas.grid, meas.amplitudes(), meas.zs, weights, mode, p_values, True
    )
    return grad


def loss_and_gradient(
    output,
    meas: HologramStack,
    weights: LossWeights = DEFAULT_WEIGHTS,
    mode: str = "complex",
):
    """(LossReport, gradient) in one forward pass; see loss_gradient_wrt_field."""
    o_values, p_values = _as_output(output, meas, mode)
    return _core(
        o_values, meas.grid, meas.amplitudes(), meas.zs, weights, mode, p_values, True
    )
