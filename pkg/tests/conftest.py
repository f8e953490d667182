import pytest

from gpemixed import assemble, friedrichs_keller, harmonic, red_refine


@pytest.fixture(scope="session")
def mesh8():
    """The 8-element point-symmetric initial mesh of (-8, 8)^2."""
    return friedrichs_keller(8.0, 2, symmetric=True)


@pytest.fixture(scope="session")
def mesh32(mesh8):
    return red_refine(mesh8)


@pytest.fixture(scope="session")
def ops32_harmonic(mesh32):
    return assemble(mesh32, harmonic(10.0))
