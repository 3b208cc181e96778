"""Minimal reverse-mode autodiff over real (c, h, w) tensors.

Only the primitives the spectral network actually uses are implemented:
channel-mixing 1x1 and 3x3 convolutions, per-channel PReLU, the windowed
Fourier branch, elementwise add, and complex-mean normalization of a
two-channel (re, im) tensor. Values are kept real throughout; complex
intermediates live only inside primitive forward/backward closures.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch, TapeError
from .field import EPS_NORM
from .errors import DegenerateMean

__all__ = [
    "Tape",
    "Tensor",
    "add",
    "conv1x1",
    "conv3x3",
    "prelu",
    "fourier_branch",
    "complex_normalize",
]


class Tensor:
    """A real-valued array plus the gradient slot filled in by backward."""

    __slots__ = ("values", "grad", "tape", "node_id", "_parents", "_vjp")

    def __init__(self, values, tape=None, parents=(), vjp=None):
        v = np.asarray(values)
        if not np.issubdtype(v.dtype, np.floating):
            v = v.astype(np.float64)
        if not np.all(np.isfinite(v)):
            raise ValueError("tensor values must be finite")
        self.values = v
        self.grad = None
        self.tape = tape
        self._parents = parents
        self._vjp = vjp
        self.node_id = tape._record(self) if tape is not None else None

    @property
    def shape(self):
        return self.values.shape

    @property
    def dtype(self):
        return self.values.dtype


class Tape:
    """Records tensors in creation order; backward walks them in reverse.

    One tape per training thread. The node list is cleared after each
    backward pass, so a tape instance can be reused across steps.
    """

    def __init__(self):
        self._nodes: list[Tensor] = []

    def _record(self, t: Tensor) -> int:
        self._nodes.append(t)
        return len(self._nodes) - 1

    def tensor(self, values) -> Tensor:
        """Wrap a leaf (parameter or input) so gradients accumulate on it."""
        return Tensor(values, tape=self)

    def backward(self, out: Tensor, seed: np.ndarray) -> None:
        """Accumulate d(loss)/d(leaf) into .grad for every recorded tensor.

        seed is d(loss)/d(out), same shape as out. Raises TapeError if no
        forward pass was recorded or out is not the newest node.
        """
        if not self._nodes:
            raise TapeError("backward called before any forward pass")
        if out.tape is not self or out.node_id is None:
            raise TapeError("output tensor does not belong to this tape")
        seed = np.asarray(seed, dtype=out.dtype)
        if seed.shape != out.shape:
            raise ShapeMismatch(f"seed shape {seed.shape} != output {out.shape}")
        out.grad = seed.copy()
        for node in reversed(self._nodes):
            if node.grad is None or node._vjp is None:
                continue
            for parent, g in zip(node._parents, node._vjp(node.grad)):
                if g is None:
                    continue
                if parent.grad is None:
                    parent.grad = g.astype(parent.dtype, copy=True)
                else:
                    parent.grad += g.astype(parent.dtype, copy=False)
        # clear recorded intermediates; leaves keep their grads for the caller
        self._nodes = []


def _same_tape(*tensors: Tensor) -> Tape:
    tapes = {t.tape for t in tensors if t.tape is not None}
    if len(tapes) > 1:
        raise TapeError("operands recorded on different tapes")
    return tapes.pop() if tapes else None


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeMismatch(f"add: {a.shape} vs {b.shape}")
    return Tensor(
        a.values + b.values,
        tape=_same_tape(a, b),
        parents=(a, b),
        vjp=lambda g: (g, g),
    )


def conv1x1(x: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """Channel-mixing convolution: y[j] = sum_i k[j,i] x[i] + b[j]."""
    c_in, h, w = x.shape
    if kernel.shape[1] != c_in or bias.shape != (kernel.shape[0],):
        raise ShapeMismatch(f"conv1x1: x{x.shape} k{kernel.shape} b{bias.shape}")
    xm = x.values.reshape(c_in, h * w)
    y = kernel.values @ xm + bias.values[:, None]

    def vjp(g):
        gm = g.reshape(kernel.shape[0], h * w)
        gx = (kernel.values.T @ gm).reshape(c_in, h, w)
        gk = gm @ xm.T
        gb = gm.sum(axis=1)
        return gx, gk, gb

    return Tensor(
        y.reshape(kernel.shape[0], h, w),
        tape=_same_tape(x, kernel, bias),
        parents=(x, kernel, bias),
        vjp=vjp,
    )


def _im2col3(x: np.ndarray) -> np.ndarray:
    # (c,h,w) -> (9c, h*w) patch matrix for a 3x3 same-padded convolution
    c, h, w = x.shape
    p = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    cols = np.empty((c, 9, h, w), dtype=x.dtype)
    for idx in range(9):
        di, dj = divmod(idx, 3)
        cols[:, idx] = p[:, di : di + h, dj : dj + w]
    return cols.reshape(c * 9, h * w)


def conv3x3(x: Tensor, kernel: Tensor) -> Tensor:
    """3x3 same-padded convolution without bias, via an im2col GEMM."""
    c_in, h, w = x.shape
    c_out = kernel.shape[0]
    if kernel.shape != (c_out, c_in, 3, 3):
        raise ShapeMismatch(f"conv3x3: x{x.shape} k{kernel.shape}")
    cols = _im2col3(x.values)
    y = (kernel.values.reshape(c_out, c_in * 9) @ cols).reshape(c_out, h, w)

    def vjp(g):
        gm = g.reshape(c_out, h * w)
        gk = (gm @ cols.T).reshape(c_out, c_in, 3, 3)
        # input gradient is the correlation with the flipped, transposed kernel
        kflip = kernel.values[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)
        gx = (kflip.reshape(c_in, c_out * 9) @ _im2col3(g)).reshape(c_in, h, w)
        return gx, gk

    return Tensor(y, tape=_same_tape(x, kernel), parents=(x, kernel), vjp=vjp)


def prelu(x: Tensor, slope: Tensor) -> Tensor:
    """Per-channel PReLU: y = x for x > 0, slope[c] * x otherwise."""
    c = x.shape[0]
    if slope.shape != (c,):
        raise ShapeMismatch(f"prelu: x{x.shape} slope{slope.shape}")
    neg = x.values < 0
    a = slope.values[:, None, None]
    y = np.where(neg, a * x.values, x.values)

    def vjp(g):
        gx = np.where(neg, a * g, g)
        ga = (g * np.where(neg, x.values, 0.0)).sum(axis=(1, 2))
        return gx, ga

    return Tensor(y, tape=_same_tape(x, slope), parents=(x, slope), vjp=vjp)


def _complex_dtype(real_dtype) -> np.dtype:
    return np.dtype(np.complex64) if real_dtype == np.float32 else np.dtype(np.complex128)


def fourier_branch(x: Tensor, weight: Tensor, half_window: int) -> Tensor:
    """Windowed spectral mixing: per output channel j, the spectrum is
    W[j] times the channel-sum spectrum, truncated to the centered
    (2k+1)^2 window, zero elsewhere; output is the real part of the
    inverse FFT.

    The channel sum is taken before the FFT (linearity), so the forward
    pass costs one FFT plus c inverse FFTs.
    """
    c_in, h, w = x.shape
    kw = int(half_window)
    side = 2 * kw + 1
    c_out = weight.shape[0]
    if weight.shape != (c_out, side, side):
        raise ShapeMismatch(f"fourier_branch: W{weight.shape} for half_window {kw}")
    if side > min(h, w):
        raise ShapeMismatch(f"window {side} exceeds field side {min(h, w)}")
    cdt = _complex_dtype(x.dtype)
    lo_r, lo_c = h // 2 - kw, w // 2 - kw
    sl = (slice(lo_r, lo_r + side), slice(lo_c, lo_c + side))

    s_full = np.fft.fftshift(np.fft.fft2(x.values.sum(axis=0)))
    s_win = s_full[sl].astype(cdt)

    spec = np.zeros((c_out, h, w), dtype=cdt)
    spec[(slice(None),) + sl] = weight.values * s_win
    y = np.fft.ifft2(np.fft.ifftshift(spec, axes=(1, 2))).real.astype(x.dtype)

    def vjp(g):
        # adjoint of Re(ifft2(.)) under the conjugate pairing is fft2(.)/N^2
        g_spec = np.fft.fftshift(np.fft.fft2(g), axes=(1, 2)) / (h * w)
        g_win = g_spec[(slice(None),) + sl]
        g_weight = (np.conj(g_win) * s_win).real.astype(weight.dtype)
        g_s_win = (weight.values * g_win).sum(axis=0)
        g_s = np.zeros((h, w), dtype=cdt)
        g_s[sl] = g_s_win
        # adjoint of fft2 is N^2 * ifft2; real input keeps the real part
        g_sum = (h * w) * np.fft.ifft2(np.fft.ifftshift(g_s))
        gx = np.broadcast_to(g_sum.real.astype(x.dtype), x.shape).copy()
        return gx, g_weight

    return Tensor(y, tape=_same_tape(x, weight), parents=(x, weight), vjp=vjp)


def complex_normalize(x: Tensor) -> Tensor:
    """Divide the complex field (x[0] + i x[1]) by its complex mean.

    Output is again a two-channel (re, im) tensor whose complex mean is
    exactly 1. Raises DegenerateMean when the mean is numerically zero.
    """
    if x.shape[0] != 2:
        raise ShapeMismatch(f"complex_normalize expects 2 channels, got {x.shape}")
    cdt = _complex_dtype(x.dtype)
    o_raw = (x.values[0] + 1j * x.values[1]).astype(cdt)
    mu = o_raw.mean()
    if np.abs(mu) <= EPS_NORM:
        raise DegenerateMean(f"|complex mean| = {np.abs(mu):.3e} too small to normalize")
    o = o_raw / mu
    npix = o.size

    def vjp(g):
        g_o = (g[0] + 1j * g[1]).astype(cdt)
        # o = y / mu(y): d/dy pairs the direct term with the mean coupling
        coupling = np.conj(np.vdot(g_o, o) / mu) / npix
        g_y = g_o / np.conj(mu) - coupling
        return (np.stack([g_y.real, g_y.imag]).astype(x.dtype),)

    return Tensor(
        np.stack([o.real, o.imag]).astype(x.dtype),
        tape=x.tape,
        parents=(x,),
        vjp=vjp,
    )
