import numpy as np
import pytest

from protmeas import CouplingProfile, SystemModel


@pytest.fixture
def qubit_sigma_x():
    """Two-level system, unit gap, O = sigma_x, starting in the ground level."""
    return SystemModel(
        energies=np.array([-0.5, 0.5]),
        observable=np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
        initial_level=0,
    )


@pytest.fixture
def qubit_mixed():
    """Two-level system with both diagonal and off-diagonal coupling."""
    return SystemModel(
        energies=np.array([-0.5, 0.5]),
        observable=np.array([[0.7, 0.5], [0.5, 0.3]], dtype=complex),
        initial_level=0,
    )


def all_builtin_profiles(T):
    return [
        CouplingProfile.boxcar(T),
        CouplingProfile.trapezoid(T, 0.2),
        CouplingProfile.triangle(T),
        CouplingProfile.raised_cosine(T),
    ]


def random_system(rng, d=None):
    if d is None:
        d = int(rng.integers(2, 9))
    energies = np.sort(rng.uniform(-2.0, 2.0, d))
    # keep gaps clear of the degeneracy warning threshold
    energies += np.arange(d) * 0.05
    M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    observable = (M + M.conj().T) / 2
    return SystemModel(energies=energies, observable=observable,
                       initial_level=int(rng.integers(0, d)))
