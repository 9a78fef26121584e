import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from protmeas import PointerModel, SystemModel, build_pointer, transition_frequency
from protmeas.model import DegenerateSpectrumWarning, ModelValidationError


def test_system_validation():
    E = np.array([0.0, 1.0])
    with pytest.raises(ModelValidationError):
        SystemModel(E, np.array([[0, 1j], [1j, 0]]), 0)  # anti-Hermitian
    with pytest.raises(ModelValidationError):
        SystemModel(E, np.zeros((3, 3)), 0)  # shape mismatch
    with pytest.raises(ModelValidationError):
        SystemModel(E, np.zeros((2, 2)), 2)  # index out of range
    with pytest.raises(ModelValidationError):
        SystemModel(np.zeros((2, 2)), np.zeros((2, 2)), 0)  # 2-d energies


def test_degenerate_spectrum_warns_but_constructs():
    with pytest.warns(DegenerateSpectrumWarning):
        sys_ = SystemModel(np.array([1.0, 1.0 + 1e-12]),
                           np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex), 0)
    assert sys_.dim == 2


def test_transition_frequency_antisymmetric(qubit_mixed):
    assert transition_frequency(qubit_mixed, 1, 0) == pytest.approx(1.0)
    assert qubit_mixed.transition_frequency(0, 1) == pytest.approx(-1.0)
    assert qubit_mixed.transition_frequency(1, 1) == 0.0


def test_diagonal_expectation_is_real(qubit_mixed):
    assert qubit_mixed.diagonal_expectation == pytest.approx(0.7)
    assert isinstance(qubit_mixed.diagonal_expectation, float)


def test_matrix_element(qubit_mixed):
    assert qubit_mixed.matrix_element(1, 0) == 0.5 + 0j


# ---------------------------------------------------------------------------
# pointer construction
# ---------------------------------------------------------------------------

def test_build_pointer_validation():
    with pytest.raises(ModelValidationError):
        build_pointer(0.0, 1.0, grid_size=8, grid_span=4.0)
    with pytest.raises(ModelValidationError):
        build_pointer(0.0, -1.0, grid_size=64, grid_span=4.0)
    # span shorter than 8 momentum standard deviations
    with pytest.raises(ModelValidationError):
        build_pointer(0.0, 0.1, grid_size=64, grid_span=4.0)
    # span passes the sigma_p rule but the packet density at the grid edges
    # is still too large
    with pytest.raises(ModelValidationError, match="edge density"):
        build_pointer(0.0, 0.5, grid_size=64, grid_span=4.0)
    with pytest.raises(ModelValidationError):
        build_pointer(0.0, 1.0, grid_size=64, grid_span=4.0, apparatus="bogus")
    with pytest.raises(ModelValidationError):
        build_pointer(0.0, 1.0, grid_size=64, grid_span=4.0, apparatus="free")


def test_pointer_is_normalized_and_weighted():
    p = build_pointer(0.3, 1.0, grid_size=64, grid_span=4.0)
    assert np.linalg.norm(p.amplitudes) == pytest.approx(1.0)
    assert p.weights.sum() == pytest.approx(1.0)
    assert p.grid_size == 64
    assert p.momenta[0] == -4.0 and p.momenta[-1] == 4.0


def test_pointer_momentum_spread_matches_sigma_x():
    sigma_x = 0.8
    p = build_pointer(0.0, sigma_x, grid_size=257, grid_span=5.0)
    var = np.sum(p.weights * p.momenta**2)
    assert np.sqrt(var) == pytest.approx(1.0 / (2 * sigma_x), rel=1e-6)


def test_static_and_free_apparatus_energies():
    static = build_pointer(0.0, 1.0, grid_size=64, grid_span=4.0)
    assert np.all(static.apparatus_energies == 0.0)
    free = build_pointer(0.0, 1.0, grid_size=64, grid_span=4.0,
                         apparatus="free", mass=2.0)
    assert np.allclose(free.apparatus_energies, free.momenta**2 / 4.0)


@settings(max_examples=40, deadline=None)
@given(x0=st.floats(-3.0, 3.0), sigma_x=st.floats(0.75, 2.0))
def test_position_readout_recovers_packet_center(x0, sigma_x):
    p = build_pointer(x0, sigma_x, grid_size=96, grid_span=4.0)
    assert p.position_expectation() == pytest.approx(x0, abs=1e-9)


def test_position_readout_sees_applied_phase_shift():
    # multiplying by e^{-i a s} displaces the packet by s
    p = build_pointer(0.0, 1.0, grid_size=64, grid_span=4.0)
    shifted = PointerModel(
        momenta=p.momenta,
        amplitudes=p.amplitudes * np.exp(-1j * p.momenta * 0.6),
        apparatus_energies=p.apparatus_energies,
        x0=p.x0, sigma_x=p.sigma_x, grid_span=p.grid_span,
    )
    assert shifted.position_expectation() == pytest.approx(0.6, abs=1e-9)
