"""Reconstruction solvers: multi-height phase retrieval, direct variational
optimization of the physics-consistency loss, autofocusing, and refocusing.

Both solvers reconstruct at the object plane (z = 0) and are deterministic
given their inputs. The shared default initialization is the first
(smallest z) hologram lifted to a zero-phase complex field and
back-propagated by -z_1.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DegenerateMean, NumericError
from .field import ComplexField, HologramStack
from .loss import DEFAULT_WEIGHTS, LossReport, LossWeights, _core
from .propagation import _apply_transfer, propagate, transfer_values


@dataclass(frozen=True)
class SolverConfig:
    """Variational solver settings.

    lr follows a cosine-annealing schedule by default. Early stop fires
    after 50 consecutive steps whose relative total-loss change stays
    below tol.
    """

    max_iters: int = 2000
    lr: float = 0.002
    lr_schedule: str = "cosine"  # "cosine" | "constant"
    weights: LossWeights = DEFAULT_WEIGHTS
    mode: str = "complex"  # "complex" | "phase-only"
    tol: float = 1e-7
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.lr > 0:
            raise ValueError("lr must be > 0")
        if self.lr_schedule not in ("cosine", "constant"):
            raise ValueError(f"unknown lr schedule {self.lr_schedule!r}")
        if self.mode not in ("complex", "phase-only"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class SolveResult:
    """A reconstruction plus its optimization history.

    phase_map is only set in phase-only mode (mean-subtracted phase in
    units of the pi multiplier). wall_time is informational and is never
    serialized; artifact files must not depend on timing.
    """

    field: ComplexField
    phase_map: np.ndarray | None
    loss_trace: list[LossReport] = dc_field(default_factory=list)
    iterations_run: int = 0
    wall_time: float = 0.0


EARLY_STOP_STREAK = 50


def default_init(stack: HologramStack) -> ComplexField:
    """Back-propagate the first (smallest z) hologram with zero phase."""
    stack = stack.sorted_by_z()
    z1, a1 = stack.planes[0]
    h = np.conj(transfer_values(stack.grid, z1))
    return ComplexField(stack.grid, _apply_transfer(a1.astype(np.complex128), h))


def _report(o_values, grid, amps, zs, weights) -> LossReport:
    rep, _ = _core(o_values, grid, amps, zs, weights, "complex", None, False)
    return rep


def mhpr(
    stack: HologramStack,
    iters: int = 100,
    init: ComplexField | None = None,
    weights: LossWeights = DEFAULT_WEIGHTS,
    track_loss: bool = True,
) -> SolveResult:
    """Multi-height phase retrieval by cyclic amplitude replacement.

    One iteration visits every plane in ascending z: propagate the current
    object estimate to z_m, replace the amplitude with the measured one
    while retaining the phase, and propagate back to the object plane.
    """
    t0 = time.perf_counter()
    stack = stack.sorted_by_z()
    grid = stack.grid
    amps = stack.amplitudes()
    zs = stack.zs
    f = (init if init is not None else default_init(stack)).values.copy()
    trace: list[LossReport] = []
    for _ in range(iters):
        for idx, z in enumerate(zs):
            h = transfer_values(grid, z)
            u = _apply_transfer(f, h)
            au = np.abs(u)
            ph = np.divide(u, au, out=np.ones_like(u), where=au > 0)
            f = _apply_transfer(amps[idx] * ph, np.conj(h))
        if track_loss:
            trace.append(_report(f, grid, amps, zs, weights))
    return SolveResult(
        field=ComplexField(grid, f),
        phase_map=None,
        loss_trace=trace,
        iterations_run=iters,
        wall_time=time.perf_counter() - t0,
    )


def _cosine_lr(lr: float, step: int, total: int) -> float:
    if total <= 1:
        return lr
    return lr * 0.5 * (1.0 + math.cos(math.pi * step / total))


def variational_solve(stack: HologramStack, cfg: SolverConfig) -> SolveResult:
    """Adam on the physics-consistency loss, returning the best-loss iterate.

    Complex mode optimizes the real and imaginary parts of the object
    field; phase-only mode optimizes the phase map p with the forward
    model exp(i*pi*p). Initialization is the shared back-propagation
    default. Deterministic for fixed inputs and config.
    """
    t0 = time.perf_counter()
    stack = stack.sorted_by_z()
    grid = stack.grid
    amps = stack.amplitudes()
    zs = stack.zs
    f0 = default_init(stack)
    phase_mode = cfg.mode == "phase-only"
    if phase_mode:
        x = np.angle(f0.values) / math.pi
    else:
        x = np.stack([f0.values.real, f0.values.imag])

    adam_m = np.zeros_like(x)
    adam_v = np.zeros_like(x)
    b1, b2, eps = 0.9, 0.999, 1e-8
    trace: list[LossReport] = []
    best_total = math.inf
    best_x = x.copy()
    streak = 0
    iters_run = 0

    def eval_loss(xv, want_grad):
        if phase_mode:
            o = np.exp(1j * math.pi * xv)
            return _core(o, grid, amps, zs, cfg.weights, "phase-only", xv, want_grad)
        o = xv[0] + 1j * xv[1]
        return _core(o, grid, amps, zs, cfg.weights, "complex", None, want_grad)

    for t in range(1, cfg.max_iters + 1):
        report, grad = eval_loss(x, True)
        if not math.isfinite(report.total):
            raise NumericError(f"non-finite loss at iteration {t}")
        trace.append(report)
        if report.total < best_total:
            best_total = report.total
            best_x = x.copy()
        if len(trace) >= 2:
            prev = trace[-2].total
            rel = abs(report.total - prev) / max(abs(prev), 1e-300)
            streak = streak + 1 if rel < cfg.tol else 0
            if streak >= EARLY_STOP_STREAK:
                break
        g = grad if phase_mode else np.stack([grad.real, grad.imag])
        lr_t = (
            _cosine_lr(cfg.lr, t - 1, cfg.max_iters)
            if cfg.lr_schedule == "cosine"
            else cfg.lr
        )
        adam_m = b1 * adam_m + (1.0 - b1) * g
        adam_v = b2 * adam_v + (1.0 - b2) * g * g
        m_hat = adam_m / (1.0 - b1**t)
        v_hat = adam_v / (1.0 - b2**t)
        x = x - lr_t * m_hat / (np.sqrt(v_hat) + eps)
        iters_run = t

    final_report, _ = eval_loss(x, False)
    trace.append(final_report)
    if final_report.total < best_total:
        best_total = final_report.total
        best_x = x.copy()

    if phase_mode:
        phase_map = best_x - best_x.mean()
        out_field = ComplexField(grid, np.exp(1j * math.pi * phase_map))
    else:
        phase_map = None
        out_field = ComplexField(grid, best_x[0] + 1j * best_x[1])
    return SolveResult(
        field=out_field,
        phase_map=phase_map,
        loss_trace=trace,
        iterations_run=iters_run,
        wall_time=time.perf_counter() - t0,
    )


def _grad_mag(a: np.ndarray) -> np.ndarray:
    gx = np.zeros_like(a)
    gy = np.zeros_like(a)
    gx[:, :-1] = a[:, 1:] - a[:, :-1]
    gy[:-1, :] = a[1:, :] - a[:-1, :]
    return np.sqrt(gx * gx + gy * gy)


def edge_sparsity_score(f: ComplexField) -> float:
    """Tamura coefficient of the gradient magnitude of |f|; higher is sharper."""
    return _edge_score_values(f.values)


def _edge_score_values(values: np.ndarray) -> float:
    g = _grad_mag(np.abs(values))
    mean = float(g.mean())
    if mean <= 1e-12:
        raise DegenerateMean("mean gradient magnitude is zero")
    return math.sqrt(float(g.std()) / mean)


def autofocus_search(
    hologram: HologramStack,
    z_range: tuple[float, float],
    coarse_step: float = 5.0,
    refine_iters: int = 30,
) -> float:
    """Estimate the sample-to-sensor distance of a single hologram.

    Back-propagates the zero-phase lift of the first plane by each
    candidate -z and maximizes the edge-sparsity score over a coarse grid,
    then refines around the best candidate by golden-section search.
    """
    lo, hi = float(z_range[0]), float(z_range[1])
    if lo > hi:
        raise ValueError(f"bad z range: {z_range}")
    if lo == hi:
        return lo
    if coarse_step <= 0:
        raise ValueError("coarse_step must be > 0")
    grid = hologram.grid
    a0 = hologram.planes[0][1].astype(np.complex128)

    def score(z: float) -> float:
        h = np.conj(transfer_values(grid, z))
        return _edge_score_values(_apply_transfer(a0, h))

    zs = np.arange(lo, hi, coarse_step)
    zs = np.append(zs, hi)
    scores = [score(z) for z in zs]
    i0 = int(np.argmax(scores))
    a = max(lo, zs[i0] - coarse_step)
    b = min(hi, zs[i0] + coarse_step)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = score(c), score(d)
    for _ in range(refine_iters):
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = score(d)
        else:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = score(c)
    return 0.5 * (a + b)


def refocus(f: ComplexField, delta_z: float) -> ComplexField:
    """Digitally refocus a reconstruction simulated delta_z away: propagate
    by -delta_z."""
    return propagate(f, -delta_z)
