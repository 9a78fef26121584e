"""Finite-dimensional system and Gaussian pointer apparatus.

The system is a diagonal Hamiltonian (energy list), a Hermitian observable,
and the index of the initially occupied level.  The pointer is a Gaussian
wave packet expanded over a discrete grid of pointer-momentum eigenvalues.
All quantities use hbar = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

HERMITICITY_TOL = 1e-12
DEGENERACY_GAP = 1e-9
EDGE_DENSITY_RATIO = 1e-6


class ModelValidationError(ValueError):
    """Invalid system or pointer construction parameters."""


class DegenerateSpectrumWarning(UserWarning):
    """The energy spectrum has a (near-)degenerate pair.

    Construction proceeds so that the energy-conserving transition pathology
    can be exercised deliberately.
    """


@dataclass(frozen=True)
class SystemModel:
    energies: np.ndarray
    observable: np.ndarray
    initial_level: int

    def __post_init__(self):
        E = np.asarray(self.energies, dtype=float)
        O = np.asarray(self.observable, dtype=complex)
        if E.ndim != 1 or E.size == 0:
            raise ModelValidationError("energies must be a non-empty 1-d array")
        if O.shape != (E.size, E.size):
            raise ModelValidationError(
                f"observable must be {E.size}x{E.size}, got {O.shape}"
            )
        if np.max(np.abs(O - O.conj().T)) > HERMITICITY_TOL:
            raise ModelValidationError("observable is not Hermitian to 1e-12")
        if not 0 <= self.initial_level < E.size:
            raise ModelValidationError(
                f"initial_level {self.initial_level} out of range for d={E.size}"
            )
        if E.size > 1:
            gaps = np.abs(np.subtract.outer(E, E))
            gaps[np.diag_indices_from(gaps)] = np.inf
            if gaps.min() < DEGENERACY_GAP:
                warnings.warn(
                    "spectrum has a near-degenerate pair "
                    f"(min gap {gaps.min():.3e}); transitions between the pair "
                    "will not be suppressed by long measurement times",
                    DegenerateSpectrumWarning,
                    stacklevel=2,
                )
        object.__setattr__(self, "energies", E)
        object.__setattr__(self, "observable", O)

    @property
    def dim(self) -> int:
        return self.energies.size

    def transition_frequency(self, m: int, k: int) -> float:
        """omega_mk = E_m - E_k (hbar = 1); antisymmetric in (m, k)."""
        return float(self.energies[m] - self.energies[k])

    def matrix_element(self, m: int, k: int) -> complex:
        return complex(self.observable[m, k])

    @property
    def diagonal_expectation(self) -> float:
        """<n|O|n> for the initial level n (real by Hermiticity)."""
        n = self.initial_level
        return float(self.observable[n, n].real)


def transition_frequency(system: SystemModel, m: int, k: int) -> float:
    return system.transition_frequency(m, k)


@dataclass(frozen=True)
class PointerModel:
    momenta: np.ndarray          # grid of pointer-momentum eigenvalues a_i
    amplitudes: np.ndarray       # <A_i|phi(x0)>, normalized on the grid
    apparatus_energies: np.ndarray
    x0: float
    sigma_x: float
    grid_span: float             # half-width of the momentum grid

    @property
    def grid_size(self) -> int:
        return self.momenta.size

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def position_expectation(self) -> float:
        """<X> read off the momentum-space phase gradient."""
        return _phase_gradient_position(self.momenta, self.amplitudes)


def _phase_gradient_position(momenta: np.ndarray, amplitudes: np.ndarray) -> float:
    """<X> = -sum_i |phi_i|^2 d(arg phi)/da at grid point i.

    Exact for packets of the form |phi(a)| e^{-i a x}; robust to grid
    resolution because only the local phase slope enters.
    """
    w = np.abs(amplitudes) ** 2
    w = w / w.sum()
    theta = np.unwrap(np.angle(amplitudes))
    dtheta = np.gradient(theta, momenta)
    return float(-(w * dtheta).sum())


def build_pointer(
    x0: float,
    sigma_x: float,
    grid_size: int,
    grid_span: float,
    apparatus: str = "static",
    mass: float | None = None,
) -> PointerModel:
    """Gaussian pointer packet on a symmetric momentum grid [-span, span].

    Momentum amplitudes are exp(-a^2 sigma_x^2) exp(-i a x0), the Fourier
    transform of a position-space Gaussian of width sigma_x centered at x0
    (momentum spread sigma_p = 1/(2 sigma_x)).

    ``apparatus`` selects the pointer self-energies epsilon_i: "static"
    (all zero, isolating the measurement-induced shift) or "free" with a
    ``mass`` giving epsilon_i = a_i^2 / 2m (free spreading).
    """
    if grid_size < 16:
        raise ModelValidationError(f"grid_size must be >= 16, got {grid_size}")
    if sigma_x <= 0 or grid_span <= 0:
        raise ModelValidationError("sigma_x and grid_span must be positive")
    sigma_p = 1.0 / (2.0 * sigma_x)
    if 2 * grid_span < 8 * sigma_p:
        raise ModelValidationError(
            f"grid span [{-grid_span}, {grid_span}] covers fewer than 8 momentum "
            f"standard deviations (sigma_p = {sigma_p:.4g})"
        )
    a = np.linspace(-grid_span, grid_span, grid_size)
    amps = np.exp(-(a**2) * sigma_x**2) * np.exp(-1j * a * x0)
    edge_ratio = (np.abs(amps[0]) ** 2 + np.abs(amps[-1]) ** 2) / np.max(np.abs(amps)) ** 2
    if edge_ratio >= EDGE_DENSITY_RATIO:
        raise ModelValidationError(
            f"momentum grid too narrow: edge density ratio {edge_ratio:.3e} "
            f">= {EDGE_DENSITY_RATIO}; widen grid_span"
        )
    amps = amps / np.linalg.norm(amps)
    if apparatus == "static":
        eps = np.zeros_like(a)
    elif apparatus == "free":
        if mass is None or mass <= 0:
            raise ModelValidationError("free-pointer apparatus needs a positive mass")
        eps = a**2 / (2.0 * mass)
    else:
        raise ModelValidationError(f"unknown apparatus model {apparatus!r}")
    return PointerModel(
        momenta=a, amplitudes=amps, apparatus_energies=eps,
        x0=float(x0), sigma_x=float(sigma_x), grid_span=float(grid_span),
    )
