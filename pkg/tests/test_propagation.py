"""Propagator checks against a direct-summation DFT oracle.

The oracle builds the unitary DFT matrix from explicit exponentials and
applies the transfer rule frequency by frequency, sharing no code with
the FFT path.
"""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holophys.errors import DataError
from holophys.field import ComplexField, HologramStack, OpticalGrid, energy
from holophys.propagation import (
    adjoint_propagate,
    band_limit,
    propagate,
    sigma_for_snr_db,
    simulate_hologram_stack,
    transfer_function,
    transfer_values,
)

from conftest import random_field_values


def dft_matrix(n: int) -> np.ndarray:
    idx = np.arange(n)
    return np.exp(-2j * math.pi * np.outer(idx, idx) / n) / math.sqrt(n)


def oracle_transfer(grid: OpticalGrid, z: float) -> np.ndarray:
    n = grid.n
    h = np.zeros((n, n), dtype=complex)
    k2 = grid.k**2
    for p in range(n):
        for q in range(n):
            # signed frequency index: n/2..n-1 alias to negative
            ps = p - n if p >= n // 2 else p
            qs = q - n if q >= n // 2 else q
            xi = 2 * math.pi * ps / (n * grid.pitch)
            eta = 2 * math.pi * qs / (n * grid.pitch)
            rho2 = xi * xi + eta * eta
            if rho2 < k2:
                h[p, q] = np.exp(1j * z * math.sqrt(k2 - rho2))
    return h


def oracle_propagate(f: ComplexField, z: float) -> np.ndarray:
    w = dft_matrix(f.grid.n)
    spec = w @ f.values @ w.T
    spec *= oracle_transfer(f.grid, z)
    return np.conj(w) @ spec @ np.conj(w.T)


def test_matches_direct_dft_oracle(grid16, rng):
    for z in (0.0, 37.5, 300.0, -120.0):
        f = ComplexField(grid16, random_field_values(rng, 16))
        got = propagate(f, z).values
        want = oracle_propagate(f, z)
        assert np.max(np.abs(got - want)) < 1e-8


def test_transfer_values_match_oracle(grid16):
    for z in (0.0, 300.0, -55.0):
        np.testing.assert_allclose(
            transfer_values(grid16, z), oracle_transfer(grid16, z), atol=1e-12
        )


def test_round_trip(grid16, rng):
    f = ComplexField(grid16, random_field_values(rng, 16))
    back = propagate(propagate(f, 300.0), -300.0)
    base = band_limit(f)  # evanescent content cannot survive a round trip
    assert np.max(np.abs(back.values - base.values)) < 1e-10


def test_passband_energy_conservation(grid16, rng):
    f = band_limit(ComplexField(grid16, random_field_values(rng, 16)))
    e0 = energy(f)
    e1 = energy(propagate(f, 412.0))
    assert abs(e1 - e0) / e0 < 1e-12


@given(st.integers(0, 2**32 - 1), st.floats(-400, 400))
def test_adjoint_identity(seed, z):
    grid = OpticalGrid(16, 1.12, 0.53, 1.0)
    rng = np.random.default_rng(seed)
    a = ComplexField(grid, random_field_values(rng, 16))
    b = ComplexField(grid, random_field_values(rng, 16))
    lhs = np.vdot(b.values, propagate(a, z).values)
    rhs = np.vdot(adjoint_propagate(b, z).values, a.values)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_adjoint_equals_reverse_on_passband(grid16, rng):
    f = band_limit(ComplexField(grid16, random_field_values(rng, 16)))
    np.testing.assert_allclose(
        adjoint_propagate(f, 250.0).values, propagate(f, -250.0).values, atol=1e-12
    )


def test_transfer_is_cached_and_readonly(grid16):
    h1 = transfer_values(grid16, 333.0)
    h2 = transfer_values(grid16, 333.0)
    assert h1 is h2
    with pytest.raises(ValueError):
        h1[0, 0] = 0.0
    tf = transfer_function(grid16, 333.0)
    assert tf.z == 333.0 and tf.values is h1


def test_zero_distance_is_band_limited_identity(grid16, rng):
    f = ComplexField(grid16, random_field_values(rng, 16))
    g = propagate(f, 0.0)
    assert np.max(np.abs(band_limit(f).values - g.values)) < 1e-13


def test_simulate_stack_noiseless_amplitudes(grid64, rng):
    f = ComplexField(grid64, random_field_values(rng, 64))
    s = simulate_hologram_stack(f, [300.0, 375.0])
    assert s.m == 2 and s.zs == (300.0, 375.0)
    np.testing.assert_allclose(
        s.amplitudes()[1], np.abs(propagate(f, 375.0).values), atol=1e-13
    )


def test_simulate_stack_noise_is_seeded(grid16, rng):
    f = ComplexField(grid16, random_field_values(rng, 16))
    a = simulate_hologram_stack(f, [300.0], noise_sigma=0.05, seed=9)
    b = simulate_hologram_stack(f, [300.0], noise_sigma=0.05, seed=9)
    c = simulate_hologram_stack(f, [300.0], noise_sigma=0.05, seed=10)
    np.testing.assert_array_equal(a.amplitudes(), b.amplitudes())
    assert np.any(a.amplitudes() != c.amplitudes())
    with pytest.raises(DataError):
        simulate_hologram_stack(f, [])
    with pytest.raises(ValueError):
        simulate_hologram_stack(f, [300.0], noise_sigma=-1.0)


def test_snr_sigma_inverts_definition():
    sigma = sigma_for_snr_db(0.8, 30.0)
    snr_back = 20 * math.log10(0.8 / (sigma * math.sqrt(2)))
    assert snr_back == pytest.approx(30.0, abs=1e-12)
    with pytest.raises(ValueError):
        sigma_for_snr_db(0.0, 30.0)
