"""Trapping-potential presets and the interaction strength kappa.

Presets: the harmonic well V(x) = |x|^2 / 2, a constant value, a seeded
coin-flip disorder field that is constant on a grid of eps-sized square
cells, and user-supplied cell grids.  Grid-based potentials are exact on any
mesh whose elements are nested in the cells.
"""

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "CellGrid",
    "PotentialSpec",
    "harmonic",
    "constant",
    "disorder",
    "custom_grid",
    "disorder_field",
    "load_grid",
    "save_grid",
]


class CellGrid:
    """Per-cell values on an m x m grid of squares covering (-L, L)^2.

    values[iy, ix] is the value on the cell with lower-left corner
    (-L + ix*cell_size, -L + iy*cell_size).
    """

    def __init__(self, values, half_width, cell_size):
        values = np.ascontiguousarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ConfigurationError("cell grid must be square")
        m = values.shape[0]
        if not np.isclose(m * cell_size, 2.0 * half_width, rtol=1e-12, atol=0.0):
            raise ConfigurationError(
                f"grid does not tile the domain: {m} cells of size {cell_size} "
                f"vs width {2.0 * half_width}"
            )
        values.setflags(write=False)
        self.values = values
        self.half_width = float(half_width)
        self.cell_size = float(cell_size)

    @property
    def n_cells(self):
        return self.values.shape[0]


class PotentialSpec:
    """A potential preset plus the interaction strength kappa (>= 0)."""

    def __init__(self, kind, kappa, value=0.0, grid=None):
        if kind not in ("harmonic", "constant", "disorder", "custom"):
            raise ConfigurationError(f"unknown potential kind {kind!r}")
        if kappa < 0.0:
            raise ConfigurationError(f"kappa must be nonnegative, got {kappa}")
        self.kind = kind
        self.kappa = float(kappa)
        self.value = float(value)
        self.grid = grid

    def __repr__(self):
        extra = ""
        if self.kind == "constant":
            extra = f", value={self.value}"
        elif self.grid is not None:
            extra = f", cells={self.grid.n_cells}x{self.grid.n_cells}"
        return f"PotentialSpec({self.kind}, kappa={self.kappa}{extra})"


def harmonic(kappa):
    """V(x) = |x|^2 / 2."""
    return PotentialSpec("harmonic", kappa)


def constant(value, kappa):
    """V identically equal to ``value`` (must be nonnegative)."""
    if value < 0.0:
        raise ConfigurationError(f"trapping potential must be nonnegative, got {value}")
    return PotentialSpec("constant", kappa, value=value)


def _check_cell_count(eps, L):
    m_exact = 2.0 * L / eps
    m = int(round(m_exact))
    if m < 1 or m != m_exact or (m & (m - 1)) != 0:
        raise ConfigurationError(
            f"cell size {eps} must divide the domain width {2.0 * L} into a "
            f"power-of-two number of cells (got {m_exact})"
        )
    return m


def disorder_field(eps, L, seed):
    """Seeded coin-flip field on (2L/eps)^2 cells with values 1 and 1+(2*eps*L)^-2.

    Uses the 64-bit PCG64 generator so grids are reproducible across platforms.
    """
    m = _check_cell_count(eps, L)
    high = 1.0 + 1.0 / (2.0 * eps * L) ** 2
    rng = np.random.Generator(np.random.PCG64(seed))
    flips = rng.integers(0, 2, size=(m, m))
    return np.where(flips == 1, high, 1.0)


def disorder(eps, L, seed, kappa):
    """Disorder preset: coin-flip potential on eps-sized cells."""
    grid = CellGrid(disorder_field(eps, L, seed), L, eps)
    return PotentialSpec("disorder", kappa, grid=grid)


def custom_grid(values, L, kappa):
    """Custom piecewise-constant potential on a square cell grid over (-L, L)^2."""
    values = np.asarray(values, dtype=float)
    if (values < 0.0).any():
        raise ConfigurationError("trapping potential must be nonnegative")
    eps = 2.0 * L / values.shape[0]
    return PotentialSpec("custom", kappa, grid=CellGrid(values, L, eps))


def load_grid(path, kappa):
    """Read a custom potential from plain text: 'nx ny L eps' header, row-major values."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ConfigurationError(f"bad grid header in {path}: expected 'nx ny L eps'")
        nx, ny = int(header[0]), int(header[1])
        L, eps = float(header[2]), float(header[3])
        values = np.loadtxt(fh, dtype=float).reshape(ny, nx)
    if nx != ny:
        raise ConfigurationError("grid must be square")
    grid = CellGrid(values, L, eps)
    spec = PotentialSpec("custom", kappa, grid=grid)
    if (values < 0.0).any():
        raise ConfigurationError("trapping potential must be nonnegative")
    return spec


def save_grid(grid, path):
    """Write a CellGrid in the plain-text format accepted by load_grid."""
    with open(path, "w") as fh:
        m = grid.n_cells
        fh.write(f"{m} {m} {grid.half_width!r} {grid.cell_size!r}\n")
        for row in grid.values:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
