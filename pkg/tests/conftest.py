import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
APP_DIR = os.path.join(ROOT, "qpde_Sim")
if APP_DIR not in sys.path:
    sys.path.insert(0, APP_DIR)

from hamiltonian.fermion_hamiltonian import DeterminantSpec, determinant_from_notation  # noqa: E402
from hamiltonian.pauli_core import PauliTerm, merge_terms  # noqa: E402
from quantum.state_prep import SuperpositionSpec  # noqa: E402

DATA_DIR = os.path.join(APP_DIR, "data")


def data_path(name: str) -> str:
    return os.path.join(DATA_DIR, name)


@pytest.fixture
def fcidump_1orb():
    return data_path("fcidump_h2_1orb.txt")


@pytest.fixture
def fcidump_2orb():
    return data_path("fcidump_h2_2orb.txt")


@pytest.fixture
def fcidump_4orb():
    return data_path("fcidump_h2_4orb.txt")


@pytest.fixture
def h2_2orb(fcidump_2orb):
    from data_manager import load_qubit_hamiltonian

    return load_qubit_hamiltonian(fcidump_2orb)


@pytest.fixture
def hf_2orb():
    return SuperpositionSpec.single(determinant_from_notation("20"))


@pytest.fixture
def triplet_2orb():
    return SuperpositionSpec.single(determinant_from_notation("aa"))


def diagonal_toy(omega: float):
    """H = ω(Z0 - Z1)/2. |10⟩ 의 에너지는 -ω, |01⟩ 은 +ω."""
    return merge_terms([PauliTerm.parse("ZI", omega / 2), PauliTerm.parse("IZ", -omega / 2)])


@pytest.fixture
def toy_states():
    """diagonal_toy 의 고유상태 (|10⟩, |01⟩). 둘째에서 첫째를 뺀 간격은 2ω."""
    first = SuperpositionSpec.single(DeterminantSpec(1 << 0, 2))
    second = SuperpositionSpec.single(DeterminantSpec(1 << 1, 2))
    return first, second


@pytest.fixture
def toy_hamiltonian():
    return diagonal_toy


@pytest.fixture
def data_file():
    return data_path
