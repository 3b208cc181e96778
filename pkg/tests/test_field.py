import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holophys.errors import DegenerateMean, ShapeMismatch
from holophys.field import (
    ComplexField,
    HologramStack,
    OpticalGrid,
    complex_mean,
    energy,
    from_amp_phase,
    normalize_by_complex_mean,
)

from conftest import random_field_values


def test_grid_wavenumber():
    g = OpticalGrid(16, 1.12, 0.53, 1.33)
    assert g.k == pytest.approx(2 * math.pi * 1.33 / 0.53, rel=1e-15)
    assert g.shape == (16, 16)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=7, pitch=1.0, wavelength=0.5),
        dict(n=6, pitch=1.0, wavelength=0.5),
        dict(n=16, pitch=0.0, wavelength=0.5),
        dict(n=16, pitch=1.0, wavelength=-0.5),
        dict(n=16, pitch=1.0, wavelength=0.5, refractive_index=0.9),
        dict(n=16, pitch=math.inf, wavelength=0.5),
    ],
)
def test_grid_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        OpticalGrid(**kwargs)


def test_field_values_are_frozen_copies(grid16, rng):
    src = random_field_values(rng, 16)
    f = ComplexField(grid16, src)
    src[0, 0] = 99.0
    assert f.values[0, 0] != 99.0
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_field_shape_and_finiteness_checks(grid16):
    with pytest.raises(ShapeMismatch):
        ComplexField(grid16, np.zeros((8, 8), dtype=complex))
    bad = np.zeros((16, 16), dtype=complex)
    bad[3, 3] = np.nan
    with pytest.raises(ValueError):
        ComplexField(grid16, bad)


def test_stack_basic_accessors(grid16, rng):
    amps = [np.abs(random_field_values(rng, 16)) for _ in range(3)]
    s = HologramStack(grid16, [(400.0, amps[0]), (300.0, amps[1]), (350.0, amps[2])])
    assert s.m == 3
    assert s.zs == (400.0, 300.0, 350.0)
    assert s.amplitudes().shape == (3, 16, 16)
    np.testing.assert_array_equal(s.amplitudes()[1], amps[1])

    by_z = s.sorted_by_z()
    assert by_z.zs == (300.0, 350.0, 400.0)
    np.testing.assert_array_equal(by_z.planes[0][1], amps[1])
    # already-sorted stacks come back as the same object
    assert by_z.sorted_by_z() is by_z


def test_stack_rejects_bad_planes(grid16):
    with pytest.raises(ValueError):
        HologramStack(grid16, [])
    with pytest.raises(ValueError):
        HologramStack(grid16, [(300.0, -np.ones((16, 16)))])
    with pytest.raises(ValueError):
        HologramStack(grid16, [(math.nan, np.ones((16, 16)))])


def test_from_amp_phase_round_trip(grid16, rng):
    amp = np.abs(rng.standard_normal((16, 16))) + 0.1
    ph = rng.uniform(-math.pi, math.pi, (16, 16))
    f = from_amp_phase(amp, ph, grid16)
    np.testing.assert_allclose(np.abs(f.values), amp, rtol=1e-14)
    np.testing.assert_allclose(np.angle(f.values), ph, rtol=1e-12)
    with pytest.raises(ValueError):
        from_amp_phase(-amp, ph, grid16)


def test_complex_mean_constant_field(grid16):
    f = ComplexField(grid16, np.full((16, 16), 2.0 - 1.0j))
    assert complex_mean(f) == pytest.approx(2.0 - 1.0j, rel=1e-15)


@given(st.integers(0, 2**32 - 1))
def test_normalize_sets_mean_to_one(seed):
    grid = OpticalGrid(16, 1.12, 0.53, 1.0)
    rng = np.random.default_rng(seed)
    vals = random_field_values(rng, 16) + 0.5  # keep the mean off zero
    g = normalize_by_complex_mean(ComplexField(grid, vals))
    assert complex_mean(g) == pytest.approx(1.0 + 0.0j, abs=1e-12)


def test_normalize_rejects_degenerate_mean(grid16):
    vals = np.ones((16, 16), dtype=complex)
    vals[: 16 // 2] = -1.0  # exact cancellation
    with pytest.raises(DegenerateMean):
        normalize_by_complex_mean(ComplexField(grid16, vals))


def test_energy_is_sum_of_squared_moduli(grid16, rng):
    vals = random_field_values(rng, 16)
    f = ComplexField(grid16, vals)
    assert energy(f) == pytest.approx(float(np.sum(np.abs(vals) ** 2)), rel=1e-13)
