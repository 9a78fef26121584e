"""Order-by-order time-ordered perturbation amplitudes.

The central object is the order-l amplitude A^(l)_m(T): an l-fold nested
time-ordered integral over virtual transition chains, with a factor of the
pointer momentum a attached per order when assembling the full amplitude
C_m(T) = sum_l a^l A^(l)_m(T).

The nested integrals are evaluated by chaining cumulative 1-d quadratures
on a shared time grid: each order is one pass of
phi_l(t) = integral_{-T/2}^{t} g(s) (-i) O_I(s) phi_{l-1}(s) ds,
which is exact for the same integrand class as naive l-dimensional
quadrature at a cost linear in the number of nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson as _cumsimp_real

from .model import SystemModel
from .profiles import (
    BUILTIN_KINDS,
    CouplingProfile,
    fourier_transform,
    numeric_fourier_transform,
)

MAX_ORDER = 6


class OrderCapError(ValueError):
    """Requested Dyson order exceeds the nested-quadrature cost cap."""


class UnsupportedProfileError(ValueError):
    """Closed forms exist only for constant (boxcar) coupling."""


class SurvivalAmplitudeError(ValueError):
    """m = n is a survival amplitude, not a transition."""


# ---------------------------------------------------------------------------
# time grid and chained cumulative quadrature
# ---------------------------------------------------------------------------

def cumulative_simpson(y, *, x, initial=0.0, axis=-1):
    """Complex-safe wrapper; scipy's version silently drops imaginary parts."""
    y = np.asarray(y)
    if np.iscomplexobj(y):
        return (_cumsimp_real(y.real, x=x, initial=initial, axis=axis)
                + 1j * _cumsimp_real(y.imag, x=x, initial=initial, axis=axis))
    return _cumsimp_real(y, x=x, initial=initial, axis=axis)


def _segment_grids(profile: CouplingProfile, total_nodes: int) -> list[np.ndarray]:
    """Per-smooth-segment grids (corner points are segment boundaries)."""
    bp = profile.breakpoints()
    T = profile.duration
    segs = []
    for lo, hi in zip(bp[:-1], bp[1:]):
        n = max(8, int(math.ceil(total_nodes * (hi - lo) / T)))
        if n % 2:
            n += 1  # even interval count -> Simpson-friendly
        segs.append(np.linspace(lo, hi, n + 1))
    return segs


def _auto_nodes(system: SystemModel, profile: CouplingProfile, nodes: int) -> int:
    """Enough nodes to resolve the fastest Bohr oscillation to ~1e-9."""
    E = system.energies
    omega_max = float(np.max(np.abs(np.subtract.outer(E, E)))) if E.size > 1 else 0.0
    periods = omega_max * profile.duration / (2 * np.pi)
    return max(nodes, 4096, min(400_000, int(1000 * max(1.0, periods))))


def _cumulative(segments: list[np.ndarray], values: list[np.ndarray]) -> list[np.ndarray]:
    """Running integral across concatenated segments (continuous at joints)."""
    out, offset = [], 0.0
    for t, y in zip(segments, values):
        c = cumulative_simpson(y, x=t, initial=0.0) + offset
        offset = c[-1]
        out.append(c)
    return out


@dataclass(frozen=True)
class DysonRequest:
    system: SystemModel
    profile: CouplingProfile
    max_order: int
    pointer_momentum: float = 1.0
    nodes: int = 4096

    def __post_init__(self):
        if not 1 <= self.max_order <= MAX_ORDER:
            raise OrderCapError(
                f"max_order must be in [1, {MAX_ORDER}], got {self.max_order}"
            )
        if self.nodes < 32:
            raise ValueError(f"nodes must be >= 32, got {self.nodes}")


@dataclass(frozen=True)
class AmplitudeTable:
    """Order-resolved amplitudes A^(l)_m and their assembly metadata."""

    orders: np.ndarray        # shape (max_order + 1, d), orders[0] = delta_mn
    system: SystemModel
    profile: CouplingProfile
    max_order: int

    def assemble(self, a: float) -> np.ndarray:
        """C_m = sum_l a^l A^(l)_m for one pointer-momentum value."""
        powers = a ** np.arange(self.max_order + 1)
        return powers @ self.orders

    def truncation_bound(self, a: float) -> float:
        """Crude bound on the dropped tail, (|a| max|O|)^(L+1) / (L+1)!."""
        scale = abs(a) * float(np.max(np.abs(self.system.observable)))
        L = self.max_order
        return scale ** (L + 1) / math.factorial(L + 1)


def amplitude_table(req: DysonRequest) -> AmplitudeTable:
    """All A^(l)_m for l = 0..max_order by chained cumulative quadrature."""
    system, profile = req.system, req.profile
    d, n = system.dim, system.initial_level
    E, O = system.energies, system.observable
    segments = _segment_grids(profile, _auto_nodes(system, profile, req.nodes))

    orders = np.zeros((req.max_order + 1, d), dtype=complex)
    orders[0, n] = 1.0

    # phi_l(t) per segment, starting from the constant phi_0 = e_n
    phi = [np.broadcast_to(np.eye(d, dtype=complex)[n], (t.size, d)) for t in segments]
    for ell in range(1, req.max_order + 1):
        integrands = []
        for t, p in zip(segments, phi):
            g = profile.eval(t)
            rot = np.exp(-1j * np.outer(t, E))          # e^{-i E_k t}
            w = (rot * p) @ O.T                         # sum_k O_mk e^{-iE_k t} phi_k
            integrands.append(-1j * g[:, None] * np.exp(1j * np.outer(t, E)) * w)
        phi = _cumulative_vec(segments, integrands)
        orders[ell] = phi[-1][-1]
    return AmplitudeTable(orders=orders, system=system, profile=profile,
                          max_order=req.max_order)


def _cumulative_vec(segments, integrands):
    """Componentwise running integral for (nodes, d) arrays."""
    out = []
    offset = np.zeros(integrands[0].shape[1], dtype=complex)
    for t, y in zip(segments, integrands):
        c = cumulative_simpson(y, x=t, initial=0.0, axis=0) + offset
        offset = c[-1]
        out.append(c)
    return out


def dyson_amplitude(req: DysonRequest, m: int):
    """Assembled amplitude sum_l a^l A^(l)_m and the per-order column for m."""
    table = amplitude_table(req)
    return table.assemble(req.pointer_momentum)[m], table.orders[:, m]


# ---------------------------------------------------------------------------
# first order and the pointer-shift resummation
# ---------------------------------------------------------------------------

def _transform(profile: CouplingProfile, omega: float) -> float:
    if profile.kind in BUILTIN_KINDS:
        return fourier_transform(profile, omega)
    return numeric_fourier_transform(profile, omega)


def first_order_amplitude(system: SystemModel, profile: CouplingProfile,
                          m: int, T: float | None = None) -> complex:
    """-i <m|O|n> g~(omega_mn); for m = n this is -i <n|O|n> times the area."""
    n = system.initial_level
    if m == n:
        return -1j * system.observable[n, n] * profile.area
    omega = system.transition_frequency(m, n)
    return -1j * system.observable[m, n] * _transform(profile, omega)


def first_order_probability(system: SystemModel, profile: CouplingProfile,
                            m: int, T: float | None = None) -> float:
    """|<m|O|n>|^2 |g~(omega_mn)|^2, per unit a^2.  Requires m != n."""
    n = system.initial_level
    if m == n:
        raise SurvivalAmplitudeError("m = n is the survival amplitude, not a transition")
    omega = system.transition_frequency(m, n)
    return abs(system.observable[m, n]) ** 2 * _transform(profile, omega) ** 2


def pointer_shift_phase(system: SystemModel, profile: CouplingProfile,
                        a: float) -> complex:
    """exp(-i G a <n|O|n>): the all-orders sum of the diagonal chains.

    G is the total area under g (1 for normalized windows).
    """
    G = profile.cumulative_area(profile.half_duration)
    return complex(np.exp(-1j * G * a * system.diagonal_expectation))


# ---------------------------------------------------------------------------
# nested-integral identity
# ---------------------------------------------------------------------------

def nested_integral_identity(profile: CouplingProfile, ell: int,
                             nodes: int = 8192) -> float:
    """l-fold time-ordered integral of g alone; equals area^l / l!.

    Evaluated by the cumulative recursion I_l(t) = int g(s) I_{l-1}(s) ds,
    never by the closed form, so it serves as a quadrature check.
    """
    if not 1 <= ell <= 8:
        raise ValueError(f"ell must be in [1, 8], got {ell}")
    segments = _segment_grids(profile, nodes)
    inner = [np.ones(t.size) for t in segments]
    for _ in range(ell):
        integrands = [profile.eval(t) * i for t, i in zip(segments, inner)]
        inner = _cumulative(segments, integrands)
    return float(inner[-1][-1])


# ---------------------------------------------------------------------------
# second-order closed forms (constant coupling)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SecondOrderBreakdown:
    """The three k != n pieces of A^(2)_n for constant coupling.

    energy_shift_term is -i delta_e2 T (the level-shift phase), mixing_term
    the oscillatory admixture of other levels, normalization_term the
    second-order norm correction.  Their sum is A^(2)_{n, k != n} exactly.
    """

    energy_shift_term: complex
    mixing_term: complex
    normalization_term: complex
    delta_e2: float
    pointer_momentum: float
    duration: float

    @property
    def total(self) -> complex:
        return self.energy_shift_term + self.mixing_term + self.normalization_term

    def spreading_phase(self) -> complex:
        """exp(-i a^2 delta_e2 T): spreads the packet without shifting it."""
        a = self.pointer_momentum
        return complex(np.exp(-1j * a**2 * self.delta_e2 * self.duration))


def second_order_breakdown(system: SystemModel, a: float, T: float,
                           profile: CouplingProfile | None = None) -> SecondOrderBreakdown:
    if profile is not None and profile.kind != "boxcar":
        raise UnsupportedProfileError(
            f"closed forms exist only for constant coupling, got {profile.kind!r}"
        )
    n = system.initial_level
    energy = mixing = norm = 0.0 + 0.0j
    delta_e2 = 0.0
    for k in range(system.dim):
        if k == n:
            continue
        w = abs(system.observable[n, k]) ** 2
        if w == 0.0:
            continue
        omega_nk = system.transition_frequency(n, k)
        if omega_nk == 0.0:
            raise UnsupportedProfileError(
                "degenerate pair with nonzero matrix element has no 1/omega closed form"
            )
        x = omega_nk * T
        energy += -1j * w / x
        mixing += w * np.exp(1j * x) / x**2
        norm += -w / x**2
        delta_e2 += w / omega_nk / T**2
    return SecondOrderBreakdown(
        energy_shift_term=complex(energy), mixing_term=complex(mixing),
        normalization_term=complex(norm), delta_e2=float(delta_e2),
        pointer_momentum=float(a), duration=float(T),
    )


# ---------------------------------------------------------------------------
# Appendix-style estimates for higher-order chains
# ---------------------------------------------------------------------------

def median_transition_frequency(system: SystemModel) -> float:
    """Median |omega_jk| over distinct level pairs; default 'typical' value."""
    E = system.energies
    iu = np.triu_indices(E.size, k=1)
    gaps = np.abs(np.subtract.outer(E, E))[iu]
    return float(np.median(gaps))


def alpha_distinct_chain(system: SystemModel, profile: CouplingProfile,
                         chain: list[int], omega_bar: float | None = None) -> complex:
    """Factorized estimate for a fully-virtual chain m -> k_1 -> ... -> n.

    ``chain`` lists [m, k_1, ..., k_{l-1}]; the chain implicitly terminates
    on the initial level n.  All frequencies are approximated by a single
    typical value omega_bar, giving (-i)^l (product of matrix elements)
    g~(omega_bar)^l / l!.
    """
    n = system.initial_level
    if len(chain) != len(set(chain)) or n in chain:
        raise ValueError(
            "chain entries must be distinct and different from the initial level; "
            "use dyson_amplitude for exact mixed chains"
        )
    ell = len(chain)
    if omega_bar is None:
        omega_bar = median_transition_frequency(system)
    elements = 1.0 + 0.0j
    path = list(chain) + [n]
    for i, j in zip(path[:-1], path[1:]):
        elements *= system.observable[i, j]
    gt = _transform(profile, omega_bar)
    return (-1j) ** ell * elements * gt**ell / math.factorial(ell)


def single_virtual_term(system: SystemModel, profile: CouplingProfile,
                        m: int, ell: int, nodes: int = 8192) -> complex:
    """Order-l chain m <- n <- ... <- n: the first-order-like contribution.

    Exactly (-i)^l <m|O|n> <n|O|n>^{l-1} / (l-1)! times the integral of
    e^{i omega_mn t} g(t) G(t)^{l-1}; the 1/(l-1)! prefactor is what damps
    these terms at high order.
    """
    n = system.initial_level
    if ell < 1:
        raise ValueError("ell must be >= 1")
    omega = system.transition_frequency(m, n)
    segments = _segment_grids(profile, _auto_nodes(system, profile, nodes))
    integrands = [
        np.exp(1j * omega * t) * profile.eval(t) * profile.cumulative_area(t) ** (ell - 1)
        for t in segments
    ]
    integral = _cumulative(segments, integrands)[-1][-1]
    prefactor = ((-1j) ** ell * system.observable[m, n]
                 * system.observable[n, n] ** (ell - 1) / math.factorial(ell - 1))
    return complex(prefactor * integral)


# ---------------------------------------------------------------------------
# gamma factors (T dependence of the no-virtual-transition terms)
# ---------------------------------------------------------------------------

def _stencil_coefficients(npts: int, deriv: int, h: float) -> np.ndarray:
    k = npts // 2
    offsets = np.arange(-k, k + 1) * h
    A = np.vander(offsets, npts, increasing=True).T  # A[p, j] = offsets[j]^p
    b = np.zeros(npts)
    b[deriv] = math.factorial(deriv)
    return np.linalg.solve(A, b)


def _fd_derivative(f, x: float, deriv: int, h: float, npts: int) -> float:
    k = npts // 2
    coeffs = _stencil_coefficients(npts, deriv, h)
    pts = x + np.arange(-k, k + 1) * h
    return float(np.dot(coeffs, f(pts)))


class DerivativeAccuracyError(RuntimeError):
    """Finite-difference step underflowed relative to the target point."""


def gamma_factor(profile: CouplingProfile, ell: int, omega: float, T: float) -> complex:
    """T^{-(l-1)} d^{l-1} g~ / d omega^{l-1} for constant coupling.

    Computed by Richardson-extrapolated central differences of the analytic
    transform; for large omega T its envelope follows sinc(omega T/2) for
    odd l and cos(omega T/2)/(omega T/2) for even l.
    """
    if profile.kind != "boxcar":
        raise UnsupportedProfileError("gamma factors are defined for constant coupling")
    if ell < 2:
        raise ValueError("ell must be >= 2")
    box = CouplingProfile.boxcar(T, area=profile.area)
    deriv = ell - 1
    npts = 2 * ell + 1
    h = max(1e-4, 1e-3 / T)
    if h < 1e-12 * max(1.0, abs(omega)):
        raise DerivativeAccuracyError("differentiation step underflow")
    f = lambda w: fourier_transform(box, w)
    d_h = _fd_derivative(f, omega, deriv, h, npts)
    d_h2 = _fd_derivative(f, omega, deriv, h / 2, npts)
    p = npts - deriv
    if p % 2:
        p += 1
    d = (2**p * d_h2 - d_h) / (2**p - 1)
    return complex(d / T ** (ell - 1))
