import numpy as np
import pytest

from rqas.chem_core import build_geometry, molecule, sto3g_basis
from rqas.integrals import build_tables
from rqas.qubit import active_qubit_hamiltonian, number_penalty
from rqas.scf import run_rhf, select_active_space


class OhoSystem:
    """Everything up to the qubit Hamiltonian at one geometry."""

    def __init__(self, d_oo, z):
        self.geometry = build_geometry(d_oo, z)
        self.basis = sto3g_basis(self.geometry)
        self.tables = build_tables(self.geometry, self.basis)
        self.scf = run_rhf(self.tables, self.geometry.n_electrons)
        self.asi = select_active_space(self.scf, self.tables)
        self.hamiltonian = active_qubit_hamiltonian(self.asi)
        self.penalised = self.hamiltonian + number_penalty(8, 4, 1.0)


@pytest.fixture(scope="session")
def oho_symmetric():
    return OhoSystem(2.70, 1.35)


@pytest.fixture(scope="session")
def oho_asymmetric():
    return OhoSystem(2.70, 1.0)


@pytest.fixture(scope="session")
def h2_tables():
    geom = molecule([("H", (0, 0, 0)), ("H", (0, 0, 0.7354))])
    return geom, build_tables(geom, sto3g_basis(geom))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
