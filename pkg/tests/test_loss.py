"""Loss-term oracles: closed forms for delta/step inputs plus finite
differences for the analytic gradients."""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holophys.errors import ShapeMismatch
from holophys.field import ComplexField, HologramStack, OpticalGrid
from holophys.loss import (
    DEFAULT_WEIGHTS,
    LossWeights,
    fdmae,
    hann2d,
    loss_and_gradient,
    loss_gradient_wrt_field,
    mse,
    total_loss,
    tv_complex,
    tv_phase,
)
from holophys.propagation import simulate_hologram_stack

from conftest import random_field_values


def _stack_pair(grid, diff, base=1.0):
    """Two single-plane stacks whose amplitudes differ by `diff`."""
    q = np.full(grid.shape, base)
    p = q + diff
    meas = HologramStack(grid, [(300.0, q)])
    pred = HologramStack(grid, [(300.0, p)])
    return pred, meas


def test_hann_window_values():
    w = hann2d(4)
    # h = [0, 0.75, 0.75, 0] so the inner block is 0.5625
    assert w[0, 0] == 0.0 and w[3, 3] == 0.0
    assert w[1, 1] == pytest.approx(0.5625, abs=1e-15)
    assert np.allclose(w, w.T)
    with pytest.raises(ValueError):
        hann2d(1)


def test_fdmae_delta_closed_form(grid16):
    # unitary FFT of a delta has constant modulus d/n, so the windowed
    # sum collapses to d * sum(w) / n^3
    n, d = 16, 0.37
    diff = np.zeros((n, n))
    diff[3, 5] = d
    pred, meas = _stack_pair(grid16, diff)
    want = d * hann2d(n).sum() / n**3
    assert fdmae(pred, meas) == pytest.approx(want, rel=1e-12)


def test_fdmae_is_plane_averaged(grid16):
    n, d = 16, 0.2
    diff = np.zeros((n, n))
    diff[0, 0] = d
    q = np.ones((n, n))
    meas = HologramStack(grid16, [(300.0, q), (375.0, q)])
    pred = HologramStack(grid16, [(300.0, q + diff), (375.0, q)])
    single = d * hann2d(n).sum() / n**3
    assert fdmae(pred, meas) == pytest.approx(single / 2, rel=1e-12)


def test_mse_matches_direct_mean(grid16, rng):
    diff = rng.standard_normal((16, 16)) * 0.1
    pred, meas = _stack_pair(grid16, diff)
    assert mse(pred, meas) == pytest.approx(float(np.mean(diff**2)), rel=1e-13)


def test_stack_mismatch_rejected(grid16):
    pred, meas = _stack_pair(grid16, np.zeros((16, 16)))
    other = HologramStack(grid16, [(301.0, np.ones((16, 16)))])
    with pytest.raises(ShapeMismatch):
        fdmae(pred, other)
    grid_b = OpticalGrid(16, 2.0, 0.53, 1.0)
    other_grid = HologramStack(grid_b, [(300.0, np.ones((16, 16)))])
    with pytest.raises(ShapeMismatch):
        mse(pred, other_grid)


def test_tv_step_closed_form(grid16):
    n = 16
    step = np.zeros((n, n))
    step[:, n // 2 :] = 1.0
    f = ComplexField(grid16, step.astype(complex))
    # one unit jump per row, n rows, normalized by 2n^2
    assert tv_complex(f) == pytest.approx(n / (2 * n * n), rel=1e-14)
    assert tv_phase(step) == pytest.approx(n / (n * n), rel=1e-14)


def test_tv_constant_is_zero(grid16):
    f = ComplexField(grid16, np.full((16, 16), 0.3 + 0.7j))
    assert tv_complex(f) == 0.0
    assert tv_phase(np.full((16, 16), 2.0)) == 0.0


def test_weights_validation_and_total():
    with pytest.raises(ValueError):
        LossWeights(-0.1, 1.0, 20.0)
    assert DEFAULT_WEIGHTS == LossWeights(0.1, 1.0, 20.0)


def _random_problem(rng, grid, m=2, mode_field_scale=0.6):
    truth = ComplexField(grid, random_field_values(rng, grid.n, mode_field_scale) + 1.0)
    zs = [300.0, 375.0][:m]
    meas = simulate_hologram_stack(truth, zs, noise_sigma=0.01, seed=3)
    return truth, meas


def test_report_total_is_weighted_sum(grid16, rng):
    truth, meas = _random_problem(rng, grid16)
    cand = ComplexField(grid16, random_field_values(rng, 16) + 1.0)
    rep = total_loss(cand, meas)
    want = 0.1 * rep.fdmae + 1.0 * rep.mse + 20.0 * rep.tv
    assert rep.total == pytest.approx(want, rel=1e-13)
    assert rep.as_dict()["total"] == rep.total


def test_perfect_prediction_zeroes_data_terms(grid16, rng):
    truth, _ = _random_problem(rng, grid16)
    meas = simulate_hologram_stack(truth, [300.0, 375.0])
    rep = total_loss(truth, meas)
    assert rep.fdmae < 1e-12 and rep.mse < 1e-24
    assert rep.tv > 0


def test_loss_and_gradient_agree_with_separate_calls(grid16, rng):
    truth, meas = _random_problem(rng, grid16)
    cand = ComplexField(grid16, random_field_values(rng, 16) + 1.0)
    rep, grad = loss_and_gradient(cand, meas)
    assert rep.total == total_loss(cand, meas).total
    np.testing.assert_array_equal(grad, loss_gradient_wrt_field(cand, meas))


def _fd_complex(cand, meas, weights, idx, h=1e-6):
    """Central finite differences of the total loss at one pixel."""
    base = cand.values.copy()

    def at(delta):
        v = base.copy()
        v[idx] += delta
        return total_loss(ComplexField(cand.grid, v), meas, weights).total

    d_re = (at(h) - at(-h)) / (2 * h)
    d_im = (at(1j * h) - at(-1j * h)) / (2 * h)
    return d_re + 1j * d_im


def test_gradient_matches_finite_differences_complex(grid16, rng):
    truth, meas = _random_problem(rng, grid16)
    cand = ComplexField(grid16, random_field_values(rng, 16) * 0.5 + 1.0)
    grad = loss_gradient_wrt_field(cand, meas)
    coords = [tuple(c) for c in rng.integers(0, 16, size=(10, 2))]
    for idx in coords:
        fd = _fd_complex(cand, meas, DEFAULT_WEIGHTS, idx)
        assert abs(grad[idx] - fd) <= 1e-6 * max(abs(fd), 1e-3)


def test_gradient_matches_finite_differences_phase_only(grid16, rng):
    truth, meas = _random_problem(rng, grid16)
    p = rng.uniform(0.05, 0.95, (16, 16))
    grad = loss_gradient_wrt_field(p, meas, mode="phase-only")
    assert grad.dtype == np.float64
    h = 1e-6
    for idx in [tuple(c) for c in rng.integers(0, 16, size=(10, 2))]:
        pp, pm = p.copy(), p.copy()
        pp[idx] += h
        pm[idx] -= h
        fd = (
            total_loss(pp, meas, mode="phase-only").total
            - total_loss(pm, meas, mode="phase-only").total
        ) / (2 * h)
        assert abs(grad[idx] - fd) <= 1e-6 * max(abs(fd), 1e-3)


def test_phase_only_data_terms_match_complex_mode(grid16, rng):
    _, meas = _random_problem(rng, grid16)
    p = rng.uniform(0.0, 1.0, (16, 16))
    rep_p = total_loss(p, meas, mode="phase-only")
    field = ComplexField(grid16, np.exp(1j * math.pi * p))
    rep_c = total_loss(field, meas)
    assert rep_p.fdmae == pytest.approx(rep_c.fdmae, rel=1e-13)
    assert rep_p.mse == pytest.approx(rep_c.mse, rel=1e-13)
    assert rep_p.tv == pytest.approx(tv_phase(p), rel=1e-13)


def test_mode_validation(grid16, rng):
    _, meas = _random_problem(rng, grid16)
    with pytest.raises(ShapeMismatch):
        total_loss(np.zeros((16, 16)), meas, mode="complex")
    with pytest.raises(ShapeMismatch):
        total_loss(np.zeros((8, 8)), meas, mode="phase-only")
    with pytest.raises(ValueError):
        total_loss(np.zeros((16, 16)), meas, mode="amplitude")


@given(st.integers(0, 2**32 - 1))
def test_loss_terms_nonnegative(seed):
    grid = OpticalGrid(16, 1.12, 0.53, 1.0)
    rng = np.random.default_rng(seed)
    truth = ComplexField(grid, random_field_values(rng, 16) + 1.0)
    meas = simulate_hologram_stack(truth, [300.0, 375.0], noise_sigma=0.02, seed=seed)
    cand = ComplexField(grid, random_field_values(rng, 16) + 1.0)
    rep = total_loss(cand, meas)
    assert rep.fdmae >= 0 and rep.mse >= 0 and rep.tv >= 0 and rep.total >= 0
