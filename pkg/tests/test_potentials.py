import numpy as np
import pytest

from gpemixed import ConfigurationError, constant, custom_grid, disorder, disorder_field, harmonic
from gpemixed.potentials import CellGrid, load_grid, save_grid


def test_disorder_field_values_and_shape():
    grid = disorder_field(2.0**-6, 1.0, seed=3)
    assert grid.shape == (128, 128)
    amp = 1.0 + (2.0 * 2.0**-6 * 1.0) ** -2
    assert amp == 1025.0
    assert set(np.unique(grid)) == {1.0, 1025.0}


def test_disorder_field_deterministic():
    a = disorder_field(2.0**-6, 1.0, seed=11)
    b = disorder_field(2.0**-6, 1.0, seed=11)
    c = disorder_field(2.0**-6, 1.0, seed=12)
    assert (a == b).all()
    assert (a != c).any()


def test_disorder_fraction_balanced():
    grid = disorder_field(2.0**-6, 1.0, seed=0)
    frac = (grid > 1.0).mean()
    assert 0.45 < frac < 0.55


def test_disorder_requires_power_of_two_cells():
    with pytest.raises(ConfigurationError):
        disorder_field(1.0 / 96.0, 1.0, seed=0)  # 192 cells: not a power of two
    with pytest.raises(ConfigurationError):
        disorder_field(0.3, 1.0, seed=0)  # does not divide the width
    # powers of two are fine
    assert disorder_field(0.5, 1.0, seed=0).shape == (4, 4)


def test_presets_nonnegative():
    for spec in (harmonic(10.0), constant(1.0, 1.0), disorder(0.25, 1.0, 0, 1.0)):
        if spec.grid is not None:
            assert (spec.grid.values >= 0).all()
    with pytest.raises(ConfigurationError):
        constant(-1.0, 1.0)
    with pytest.raises(ConfigurationError):
        harmonic(-0.5)


def test_custom_grid_roundtrip(tmp_path):
    values = np.arange(16.0).reshape(4, 4)
    spec = custom_grid(values, 2.0, kappa=3.0)
    path = tmp_path / "grid.txt"
    save_grid(spec.grid, path)
    loaded = load_grid(path, kappa=3.0)
    assert loaded.grid.half_width == 2.0
    assert loaded.grid.cell_size == 1.0
    np.testing.assert_array_equal(loaded.grid.values, values)


def test_cell_grid_validation():
    with pytest.raises(ConfigurationError):
        CellGrid(np.ones((4, 3)), 1.0, 0.5)
    with pytest.raises(ConfigurationError):
        CellGrid(np.ones((4, 4)), 1.0, 0.3)
    with pytest.raises(ConfigurationError):
        custom_grid(-np.ones((4, 4)), 1.0, kappa=1.0)
