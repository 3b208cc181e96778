"""Spectral network for hologram stacks, trained self-supervised.

The network maps M measured hologram amplitudes to one complex object
field. Every mechanism is toy-scale but structurally complete: a 1x1
head, residual blocks whose shared-parameter spectral module is applied
recursively, PReLU activations, a large-scale residual, a 1x1 tail, and
complex-mean output normalization.

Training minimizes the physics-consistency loss of the predicted field
against the measured stack, so the pipeline never sees object fields.
The train() entry point accepts HologramStacks only; handing it anything
else raises.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import ConfigError, DataError, ShapeMismatch
from .field import ComplexField, HologramStack
from .ioutil import atomic_write_bytes, canonical_json, sha256_bytes
from .loss import DEFAULT_WEIGHTS, LossWeights, loss_and_gradient, total_loss

__all__ = [
    "SpafConfig",
    "BlockWeights",
    "SpafWeights",
    "init_weights",
    "spaf_module_forward",
    "spaf_block_forward",
    "network_apply",
    "network_forward",
    "train",
    "save_weights",
    "load_weights",
]

WEIGHTS_MAGIC = b"SPWT\x01\x00\x00\x00"


@dataclass(frozen=True)
class SpafConfig:
    """Architecture hyperparameters for the spectral network."""

    m_inputs: int
    channels: int = 32
    blocks: int = 4
    half_windows: tuple[int, ...] = (16, 12, 8, 8)
    recursion: int = 2

    def __post_init__(self):
        object.__setattr__(self, "half_windows", tuple(int(k) for k in self.half_windows))
        if self.m_inputs < 1:
            raise ConfigError(f"m_inputs must be >= 1, got {self.m_inputs}")
        if self.channels < 1 or self.blocks < 1:
            raise ConfigError("channels and blocks must be >= 1")
        if len(self.half_windows) != self.blocks:
            raise ConfigError(
                f"need one half window per block: {len(self.half_windows)} != {self.blocks}"
            )
        if any(k < 1 for k in self.half_windows):
            raise ConfigError("half windows must be >= 1")
        if any(a < b for a, b in zip(self.half_windows, self.half_windows[1:])):
            raise ConfigError(f"half windows must be nonincreasing: {self.half_windows}")
        if self.recursion < 1:
            raise ConfigError(f"recursion must be >= 1, got {self.recursion}")

    def as_dict(self) -> dict:
        return {
            "m_inputs": self.m_inputs,
            "channels": self.channels,
            "blocks": self.blocks,
            "half_windows": list(self.half_windows),
            "recursion": self.recursion,
        }


class BlockWeights:
    """One block's shared-module parameters: conv kernel, spectral weight, PReLU slope."""

    __slots__ = ("conv", "fourier", "slope")

    def __init__(self, conv, fourier, slope):
        self.conv = conv
        self.fourier = fourier
        self.slope = slope


class SpafWeights:
    """All trainable arrays, in declaration (serialization) order."""

    __slots__ = ("cfg", "head_k", "head_b", "blocks", "tail_k", "tail_b")

    def __init__(self, cfg, head_k, head_b, blocks, tail_k, tail_b):
        self.cfg = cfg
        self.head_k = head_k
        self.head_b = head_b
        self.blocks = blocks
        self.tail_k = tail_k
        self.tail_b = tail_b

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        out = [("head_k", self.head_k), ("head_b", self.head_b)]
        for i, b in enumerate(self.blocks):
            out += [
                (f"block{i}.conv", b.conv),
                (f"block{i}.fourier", b.fourier),
                (f"block{i}.slope", b.slope),
            ]
        out += [("tail_k", self.tail_k), ("tail_b", self.tail_b)]
        return out

    def copy(self) -> "SpafWeights":
        return SpafWeights(
            self.cfg,
            self.head_k.copy(),
            self.head_b.copy(),
            [BlockWeights(b.conv.copy(), b.fourier.copy(), b.slope.copy()) for b in self.blocks],
            self.tail_k.copy(),
            self.tail_b.copy(),
        )


def init_weights(cfg: SpafConfig, seed=0, dtype=np.float32) -> SpafWeights:
    """He-style kernels, small spectral weights, PReLU slope 0.25.

    The tail bias starts at (1, 0) so the raw output field has complex
    mean near 1 and the normalization is well conditioned from step one.
    """
    rng = np.random.default_rng(seed)
    c, m = cfg.channels, cfg.m_inputs
    head_k = (rng.standard_normal((c, m)) * math.sqrt(2.0 / m)).astype(dtype)
    head_b = np.zeros(c, dtype=dtype)
    blocks = []
    for kw in cfg.half_windows:
        side = 2 * kw + 1
        conv = (rng.standard_normal((c, c, 3, 3)) * math.sqrt(2.0 / (9 * c))).astype(dtype)
        fourier = (rng.standard_normal((c, side, side)) / (side * math.sqrt(c))).astype(dtype)
        slope = np.full(c, 0.25, dtype=dtype)
        blocks.append(BlockWeights(conv, fourier, slope))
    tail_k = (rng.standard_normal((2, c)) * math.sqrt(2.0 / c)).astype(dtype)
    tail_b = np.array([1.0, 0.0], dtype=dtype)
    return SpafWeights(cfg, head_k, head_b, blocks, tail_k, tail_b)


def spaf_module_forward(x: ad.Tensor, conv: ad.Tensor, fourier: ad.Tensor, half_window: int) -> ad.Tensor:
    """One module: 3x3 convolution plus the windowed Fourier branch."""
    return ad.add(ad.conv3x3(x, conv), ad.fourier_branch(x, fourier, half_window))


def spaf_block_forward(x: ad.Tensor, conv: ad.Tensor, fourier: ad.Tensor, slope: ad.Tensor,
                       half_window: int, recursion: int = 2) -> ad.Tensor:
    """Recursion applications of one shared module with residual adds,
    then PReLU, then the block-level residual."""
    y = x
    for _ in range(recursion):
        y = ad.add(y, spaf_module_forward(y, conv, fourier, half_window))
    return ad.add(ad.prelu(y, slope), x)


class _TapedParams:
    """Leaf tensors for every parameter array on one tape."""

    def __init__(self, weights: SpafWeights, tape: ad.Tape | None):
        wrap = tape.tensor if tape is not None else ad.Tensor
        self.head_k = wrap(weights.head_k)
        self.head_b = wrap(weights.head_b)
        self.blocks = [
            (wrap(b.conv), wrap(b.fourier), wrap(b.slope)) for b in weights.blocks
        ]
        self.tail_k = wrap(weights.tail_k)
        self.tail_b = wrap(weights.tail_b)

    def leaves(self) -> list[ad.Tensor]:
        out = [self.head_k, self.head_b]
        for conv, fourier, slope in self.blocks:
            out += [conv, fourier, slope]
        out += [self.tail_k, self.tail_b]
        return out


def network_apply(amps: np.ndarray, weights: SpafWeights, cfg: SpafConfig,
                  tape: ad.Tape | None = None) -> tuple[ad.Tensor, "_TapedParams"]:
    """Run the network on an (M, n, n) amplitude array.

    Returns the normalized two-channel (re, im) output tensor and the
    taped parameter leaves (whose .grad fills in after tape.backward).
    """
    if amps.ndim != 3 or amps.shape[0] != cfg.m_inputs:
        raise ShapeMismatch(f"expected ({cfg.m_inputs}, n, n) amplitudes, got {amps.shape}")
    n = amps.shape[1]
    if any(2 * kw + 1 > n for kw in cfg.half_windows):
        raise ConfigError(f"half windows {cfg.half_windows} too large for n={n}")
    dtype = weights.head_k.dtype
    params = _TapedParams(weights, tape)
    x = ad.Tensor(amps.astype(dtype), tape=tape)
    h0 = ad.conv1x1(x, params.head_k, params.head_b)
    t = h0
    for (conv, fourier, slope), kw in zip(params.blocks, cfg.half_windows):
        t = spaf_block_forward(t, conv, fourier, slope, kw, cfg.recursion)
    t = ad.add(t, h0)
    t = ad.conv1x1(t, params.tail_k, params.tail_b)
    return ad.complex_normalize(t), params


def network_forward(stack: HologramStack, weights: SpafWeights, cfg: SpafConfig) -> ComplexField:
    """Inference entry point: hologram stack in, complex object field out."""
    if stack.grid.n != stack.planes[0][1].shape[0]:
        raise ShapeMismatch("stack planes do not match grid")
    if stack.m != cfg.m_inputs:
        raise ShapeMismatch(f"network expects M={cfg.m_inputs} planes, stack has {stack.m}")
    out, _ = network_apply(stack.amplitudes(), weights, cfg, tape=None)
    values = (out.values[0] + 1j * out.values[1]).astype(np.complex128)
    return ComplexField(stack.grid, values)


def _loss_and_seed(out: ad.Tensor, stack: HologramStack, weights: LossWeights):
    """Physics loss of the two-channel output and the backward seed for it."""
    field = ComplexField(
        stack.grid, (out.values[0] + 1j * out.values[1]).astype(np.complex128)
    )
    report, grad = loss_and_gradient(field, stack, weights, mode="complex")
    seed = np.stack([grad.real, grad.imag]).astype(out.dtype)
    return report, seed


def _check_stacks(dataset, cfg: SpafConfig):
    if not dataset:
        raise ConfigError("training dataset is empty")
    for s in dataset:
        # self-supervision guard: the training path accepts measurements only
        if not isinstance(s, HologramStack):
            raise ConfigError(f"train() accepts HologramStacks only, got {type(s).__name__}")
        if s.m != cfg.m_inputs:
            raise ConfigError(f"stack has M={s.m}, network expects {cfg.m_inputs}")


def train(
    dataset,
    cfg: SpafConfig,
    epochs: int = 8,
    batch_size: int = 8,
    seed: int = 0,
    val_dataset=None,
    loss_weights: LossWeights = DEFAULT_WEIGHTS,
    lr: float = 0.002,
    init: SpafWeights | None = None,
    log_every: int = 25,
    verbose: bool = False,
):
    """Adam + cosine annealing on the mean physics loss over batches.

    Deterministic in (dataset order, cfg, seed). Returns (weights, log)
    where weights are the best-validation snapshot and log is a list of
    per-batch and per-epoch dict records. When val_dataset is None the
    last 5 percent of the dataset (at least one stack) is held out.
    """
    _check_stacks(dataset, cfg)
    if epochs < 1 or batch_size < 1:
        raise ConfigError("epochs and batch_size must be >= 1")
    if val_dataset is None:
        n_val = max(1, len(dataset) // 20)
        if len(dataset) < 2:
            val_dataset = list(dataset)
        else:
            val_dataset, dataset = list(dataset[-n_val:]), list(dataset[:-n_val])
    else:
        _check_stacks(val_dataset, cfg)
        dataset = list(dataset)

    weights = (init.copy() if init is not None else init_weights(cfg, seed=seed))
    names = [name for name, _ in weights.parameters()]
    arrays = [arr for _, arr in weights.parameters()]
    m1 = [np.zeros_like(a) for a in arrays]
    m2 = [np.zeros_like(a) for a in arrays]
    b1, b2, eps = 0.9, 0.999, 1e-8

    rng = np.random.default_rng(seed)
    n_batches = math.ceil(len(dataset) / batch_size)
    total_steps = epochs * n_batches
    log: list[dict] = []
    best = (math.inf, weights.copy())
    tape = ad.Tape()
    step = 0
    for epoch in range(epochs):
        order = rng.permutation(len(dataset))
        for bi in range(n_batches):
            idx = order[bi * batch_size : (bi + 1) * batch_size]
            grads = [np.zeros_like(a) for a in arrays]
            batch_report = np.zeros(4)
            for k in idx:
                stack = dataset[k]
                out, params = network_apply(stack.amplitudes(), weights, cfg, tape=tape)
                report, seed_grad = _loss_and_seed(out, stack, loss_weights)
                tape.backward(out, seed_grad)
                for g, leaf in zip(grads, params.leaves()):
                    g += leaf.grad
                batch_report += (report.fdmae, report.mse, report.tv, report.total)
            inv = 1.0 / len(idx)
            step += 1
            lr_t = 0.5 * lr * (1.0 + math.cos(math.pi * (step - 1) / max(1, total_steps - 1)))
            for a, g, v1, v2 in zip(arrays, grads, m1, m2):
                g *= inv
                v1 *= b1
                v1 += (1 - b1) * g
                v2 *= b2
                v2 += (1 - b2) * g * g
                hat1 = v1 / (1 - b1**step)
                hat2 = v2 / (1 - b2**step)
                a -= (lr_t * hat1 / (np.sqrt(hat2) + eps)).astype(a.dtype)
            batch_report *= inv
            if not np.isfinite(batch_report[3]):
                raise ArithmeticError(f"training loss became non-finite at step {step}")
            if step % log_every == 0 or bi == n_batches - 1:
                rec = {
                    "kind": "batch",
                    "epoch": epoch,
                    "step": step,
                    "lr": lr_t,
                    "fdmae": batch_report[0],
                    "mse": batch_report[1],
                    "tv": batch_report[2],
                    "total": batch_report[3],
                }
                log.append(rec)
                if verbose:
                    print(f"epoch {epoch} step {step} total {batch_report[3]:.4f}")
        val = _mean_loss(val_dataset, weights, cfg, loss_weights)
        log.append({"kind": "val", "epoch": epoch, "step": step, "total": val})
        if verbose:
            print(f"epoch {epoch} val {val:.4f}")
        if val < best[0]:
            best = (val, weights.copy())
    return best[1], log


def _mean_loss(stacks, weights: SpafWeights, cfg: SpafConfig, loss_weights: LossWeights) -> float:
    tot = 0.0
    for stack in stacks:
        field = network_forward(stack, weights, cfg)
        tot += total_loss(field, stack, loss_weights, mode="complex").total
    return tot / len(stacks)


def _fingerprint(cfg: SpafConfig, seed, payload: bytes) -> str:
    meta = canonical_json({"cfg": cfg.as_dict(), "seed": seed}).encode()
    return sha256_bytes(meta + payload)


def save_weights(path, weights: SpafWeights, seed=0) -> str:
    """Single-file format: magic, JSON header, float32 little-endian payload.

    Returns the training fingerprint recorded in the header.
    """
    payload = b"".join(a.astype("<f4").tobytes() for _, a in weights.parameters())
    fp = _fingerprint(weights.cfg, seed, payload)
    header = canonical_json(
        {
            "cfg": weights.cfg.as_dict(),
            "shapes": {name: list(a.shape) for name, a in weights.parameters()},
            "seed": seed,
            "fingerprint": fp,
        }
    ).encode()
    blob = WEIGHTS_MAGIC + struct.pack("<I", len(header)) + header + payload
    atomic_write_bytes(path, blob)
    return fp


def load_weights(path) -> tuple[SpafWeights, dict]:
    """Read a weights file back; returns (weights, header dict)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(WEIGHTS_MAGIC)] != WEIGHTS_MAGIC:
        raise DataError(f"{path}: not a spectral-weights file")
    off = len(WEIGHTS_MAGIC)
    (hlen,) = struct.unpack_from("<I", blob, off)
    off += 4
    try:
        header = json.loads(blob[off : off + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataError(f"{path}: bad weights header: {e}") from None
    off += hlen
    cfg = SpafConfig(
        m_inputs=header["cfg"]["m_inputs"],
        channels=header["cfg"]["channels"],
        blocks=header["cfg"]["blocks"],
        half_windows=tuple(header["cfg"]["half_windows"]),
        recursion=header["cfg"]["recursion"],
    )
    ref = init_weights(cfg, seed=0)
    arrays = []
    for name, a in ref.parameters():
        want = header["shapes"][name]
        count = int(np.prod(want))
        raw = blob[off : off + 4 * count]
        if len(raw) != 4 * count:
            raise DataError(f"{path}: truncated payload at {name}")
        arrays.append(np.frombuffer(raw, dtype="<f4").reshape(want).astype(np.float32))
        off += 4 * count
    if off != len(blob):
        raise DataError(f"{path}: {len(blob) - off} trailing bytes after payload")
    it = iter(arrays)
    head_k, head_b = next(it), next(it)
    blocks = [BlockWeights(next(it), next(it), next(it)) for _ in range(cfg.blocks)]
    tail_k, tail_b = next(it), next(it)
    out = SpafWeights(cfg, head_k, head_b, blocks, tail_k, tail_b)
    payload = b"".join(a.astype("<f4").tobytes() for _, a in out.parameters())
    if _fingerprint(cfg, header["seed"], payload) != header["fingerprint"]:
        raise DataError(f"{path}: fingerprint mismatch, file corrupt")
    return out, header
