"""Synthetic random images and object fields with no real-sample content.

Images are "path colorizations": draw a smoothed uniform gray image,
build the minimum spanning tree of the 4-neighbor pixel graph with edge
weights |gray(a) - gray(b)|, walk it depth-first from a random root, and
color each pixel by its normalized visit rank. The result is a structured
but entirely artificial image with values exactly filling [0, 1].

Objects combine such images as amplitude and phase channels,
(A + delta) * exp(i * pi * phi), or phase-only exp(i * pi * phi) with
unit amplitude. Dataset generation derives one independent sub-seed per
entry, so parallel and serial generation produce identical bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import depth_first_order, minimum_spanning_tree

from .errors import ConfigError
from .field import ComplexField, HologramStack, OpticalGrid, from_amp_phase
from .propagation import simulate_hologram_stack

KINDS = ("amplitude-phase", "phase-only")

# Counts every access to a SyntheticObject's complex field. Training-path
# audits snapshot this to prove the self-supervised loop never touches
# ground truth.
_field_reads = 0


def field_read_count() -> int:
    return _field_reads


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for synthetic object generation.

    delta is the amplitude offset keeping transmission away from zero;
    phase_scale multiplies the [0, 1] phase image inside the exponent
    (default pi); smoothing_radius is the box-filter radius applied to
    the base gray image before path extraction.
    """

    n: int = 64
    delta: float = 0.1
    phase_scale: float = math.pi
    smoothing_radius: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 8:
            raise ConfigError(f"patch side must be >= 8, got {self.n}")
        if not self.delta > 0:
            raise ConfigError(f"amplitude offset delta must be > 0, got {self.delta}")
        if self.smoothing_radius < 0:
            raise ConfigError("smoothing_radius must be >= 0")


class SyntheticObject:
    """A generated object: source images plus the assembled complex field."""

    __slots__ = ("amplitude_image", "phase_image", "kind", "_field")

    def __init__(self, amplitude_image, phase_image, field: ComplexField, kind: str):
        amplitude_image = np.asarray(amplitude_image, dtype=np.float64).copy()
        phase_image = np.asarray(phase_image, dtype=np.float64).copy()
        amplitude_image.setflags(write=False)
        phase_image.setflags(write=False)
        self.amplitude_image = amplitude_image
        self.phase_image = phase_image
        self.kind = kind
        self._field = field

    @property
    def field(self) -> ComplexField:
        """The complex object field. Every read is counted for audits."""
        global _field_reads
        _field_reads += 1
        return self._field

    def __repr__(self) -> str:
        return f"SyntheticObject(kind={self.kind!r}, n={self._field.grid.n})"


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def random_artificial_image(n: int, seed, smoothing_radius: int = 2) -> np.ndarray:
    """Full-coverage path colorization of a random gray landscape.

    Deterministic in seed. Output is n x n in [0, 1]; every pixel holds a
    distinct normalized rank, so min is exactly 0 and max exactly 1.
    """
    if n < 8:
        raise ConfigError(f"image side must be >= 8, got {n}")
    rng = np.random.default_rng(_as_seedseq(seed))
    gray = rng.random((n, n))
    if smoothing_radius > 0:
        gray = uniform_filter(gray, size=2 * smoothing_radius + 1, mode="wrap")

    flat = gray.ravel()
    idx = np.arange(n * n).reshape(n, n)
    # 4-neighbor edges (right and down). Weights get +1 so zero-difference
    # edges survive sparse storage, which drops explicit zeros.
    src = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    dst = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    w = np.abs(flat[src] - flat[dst]) + 1.0
    graph = csr_matrix((w, (src, dst)), shape=(n * n, n * n))
    tree = minimum_spanning_tree(graph)
    root = int(rng.integers(n * n))
    order, _ = depth_first_order(tree, i_start=root, directed=False)

    ranks = np.empty(n * n, dtype=np.float64)
    ranks[order] = np.arange(n * n, dtype=np.float64)
    return (ranks / (n * n - 1)).reshape(n, n)


def make_object(
    cfg: SynthConfig,
    grid: OpticalGrid,
    kind: str = "amplitude-phase",
    seed=None,
) -> SyntheticObject:
    """Draw a synthetic object of the given kind on the grid.

    Amplitude and phase channels come from independent sub-seeds of one
    root seed, so they are uncorrelated by construction.
    """
    if cfg.n != grid.n:
        raise ConfigError(f"config n={cfg.n} does not match grid n={grid.n}")
    if kind not in KINDS:
        raise ConfigError(f"unknown object kind {kind!r}; expected one of {KINDS}")
    ss = _as_seedseq(cfg.seed if seed is None else seed)
    s_amp, s_phase = ss.spawn(2)
    phase_img = random_artificial_image(grid.n, s_phase, cfg.smoothing_radius)
    if kind == "amplitude-phase":
        amp_img = random_artificial_image(grid.n, s_amp, cfg.smoothing_radius)
        field = from_amp_phase(amp_img + cfg.delta, cfg.phase_scale * phase_img, grid)
    else:
        amp_img = np.ones((grid.n, grid.n))
        field = from_amp_phase(amp_img, cfg.phase_scale * phase_img, grid)
    return SyntheticObject(amp_img, phase_img, field, kind)


def make_dataset(
    cfg: SynthConfig,
    grid: OpticalGrid,
    zs,
    count: int,
    noise_sigma: float = 0.0,
    kind: str = "amplitude-phase",
    seed=None,
    z_mode: str = "fixed",
    z_range: tuple[float, float] = (275.0, 400.0),
) -> list[tuple[SyntheticObject, HologramStack]]:
    """Generate (object, hologram stack) pairs, deterministic in seed.

    z_mode "fixed" uses zs verbatim for every entry; "uniform" draws
    len(zs) distances per entry uniformly from z_range and sorts them
    ascending.
    """
    if count < 1:
        raise ConfigError(f"dataset count must be >= 1, got {count}")
    if z_mode not in ("fixed", "uniform"):
        raise ConfigError(f"unknown z_mode {z_mode!r}")
    zs = [float(z) for z in zs]
    if not zs:
        raise ConfigError("zs must name at least one plane")
    if z_mode == "uniform" and not z_range[0] < z_range[1]:
        raise ConfigError(f"bad z_range {z_range}")
    root = _as_seedseq(cfg.seed if seed is None else seed)
    entries = []
    for child in root.spawn(count):
        s_obj, s_noise, s_z = child.spawn(3)
        if z_mode == "uniform":
            rngz = np.random.default_rng(s_z)
            zs_i = sorted(rngz.uniform(z_range[0], z_range[1], size=len(zs)).tolist())
        else:
            zs_i = zs
        obj = make_object(cfg, grid, kind, seed=s_obj)
        stack = simulate_hologram_stack(obj.field, zs_i, noise_sigma, seed=s_noise)
        entries.append((obj, stack))
    return entries
