import numpy as np
import pytest

from blendflow import assembly, fespace
from blendflow.mesh import Rect, structured_triangulation


@pytest.fixture(scope="session")
def mesh4():
    return structured_triangulation(4, 4)


@pytest.fixture(scope="session")
def mesh8():
    return structured_triangulation(8, 8)


@pytest.fixture(scope="session")
def mesh16():
    return structured_triangulation(16, 16)


@pytest.fixture(scope="session")
def scalar_p2_4(mesh4):
    return fespace.build_space(mesh4, degree=2, components=1)


@pytest.fixture(scope="session")
def mass_p2_4(scalar_p2_4):
    return assembly.assemble_mass(scalar_p2_4)


@pytest.fixture(scope="session")
def vel_space_8(mesh8):
    return fespace.build_space(mesh8, degree=2, components=2)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
