"""Time-dependent coupling windows g(t) and their Fourier transforms.

A coupling window is a non-negative function supported on [-T/2, T/2] with
unit area (the area can be rescaled for the unnormalized case).  Built-in
shapes come with closed-form Fourier transforms; sampled windows fall back
to adaptive quadrature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad


class ProfileError(ValueError):
    """Invalid coupling-window construction or usage."""


class NoAnalyticTransformError(ProfileError):
    """Raised when a closed-form transform is requested for a sampled window.

    Use :func:`numeric_fourier_transform` instead.
    """


class QuadratureAccuracyError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, error_estimate: float):
        super().__init__(message)
        self.error_estimate = error_estimate


BUILTIN_KINDS = ("boxcar", "trapezoid", "triangle", "raised-cosine")

_QUAD_ABS_TOL = 1e-10
_QUAD_LIMIT = 2**16


def _sinc(x):
    """Unnormalized sinc, sin(x)/x."""
    return np.sinc(np.asarray(x) / np.pi)


@dataclass(frozen=True)
class CouplingProfile:
    """A coupling window on [-T/2, T/2].

    ``area`` is the total integral of g over its support (1.0 for the
    normalized case).  Sampled windows are rescaled to the requested area
    at construction.
    """

    kind: str
    duration: float
    turn_on_fraction: float | None = None
    area: float = 1.0
    sample_times: np.ndarray | None = field(default=None, repr=False)
    sample_values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.duration <= 0:
            raise ProfileError(f"duration must be positive, got {self.duration}")
        if self.kind == "trapezoid":
            f = self.turn_on_fraction
            if f is None or not 0.0 < f <= 0.5:
                raise ProfileError(
                    f"trapezoid turn_on_fraction must lie in (0, 1/2], got {f}"
                )
        elif self.kind == "sampled":
            t = np.asarray(self.sample_times, dtype=float)
            v = np.asarray(self.sample_values, dtype=float)
            if t.ndim != 1 or t.shape != v.shape or t.size < 2:
                raise ProfileError("sampled profile needs matching 1-d time/value arrays")
            if np.any(np.diff(t) <= 0):
                raise ProfileError("sampled profile time points must be strictly increasing")
            if np.any(v < 0):
                raise ProfileError("coupling values must be non-negative")
            raw_area = np.trapezoid(v, t)
            if raw_area <= 0:
                raise ProfileError("sampled profile has zero area")
            # Rescale to the requested area and recentre the support on t=0.
            mid = 0.5 * (t[0] + t[-1])
            object.__setattr__(self, "sample_times", t - mid)
            object.__setattr__(self, "sample_values", v * (self.area / raw_area))
            object.__setattr__(self, "duration", float(t[-1] - t[0]))
        elif self.kind not in BUILTIN_KINDS:
            raise ProfileError(f"unknown profile kind {self.kind!r}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def boxcar(cls, duration: float, area: float = 1.0) -> "CouplingProfile":
        return cls("boxcar", duration, area=area)

    @classmethod
    def trapezoid(cls, duration: float, turn_on_fraction: float, area: float = 1.0) -> "CouplingProfile":
        return cls("trapezoid", duration, turn_on_fraction=turn_on_fraction, area=area)

    @classmethod
    def triangle(cls, duration: float, area: float = 1.0) -> "CouplingProfile":
        return cls("triangle", duration, area=area)

    @classmethod
    def raised_cosine(cls, duration: float, area: float = 1.0) -> "CouplingProfile":
        return cls("raised-cosine", duration, area=area)

    @classmethod
    def sampled(cls, times, values, area: float = 1.0) -> "CouplingProfile":
        return cls("sampled", float(np.asarray(times)[-1] - np.asarray(times)[0]),
                   area=area, sample_times=np.asarray(times, float),
                   sample_values=np.asarray(values, float))

    @classmethod
    def from_csv(cls, path: str | Path, area: float = 1.0) -> "CouplingProfile":
        """Load a sampled window from a two-column (time, value) CSV file."""
        times, values = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    t, v = float(row[0]), float(row[1])
                except (ValueError, IndexError):
                    if not times:  # header row
                        continue
                    raise ProfileError(f"malformed CSV row {row!r} in {path}")
                times.append(t)
                values.append(v)
        if len(times) < 2:
            raise ProfileError(f"profile CSV {path} has fewer than two samples")
        return cls.sampled(times, values, area=area)

    # -- pointwise evaluation -----------------------------------------------

    @property
    def half_duration(self) -> float:
        return 0.5 * self.duration

    def eval(self, t):
        """Pointwise g(t); exactly zero outside [-T/2, T/2]."""
        t = np.asarray(t, dtype=float)
        T = self.duration
        inside = (t >= -T / 2) & (t <= T / 2)
        if self.kind == "boxcar":
            out = np.full(t.shape, self.area / T)
        elif self.kind == "trapezoid":
            dT = self.turn_on_fraction * T
            h = self.area / (T - dT)
            ramp = (T / 2 - np.abs(t)) / dT
            out = h * np.minimum(1.0, np.maximum(0.0, ramp))
        elif self.kind == "triangle":
            out = (2 * self.area / T) * np.maximum(0.0, 1.0 - 2.0 * np.abs(t) / T)
        elif self.kind == "raised-cosine":
            out = (self.area / T) * (1.0 + np.cos(2 * np.pi * t / T))
        else:
            out = np.interp(t, self.sample_times, self.sample_values,
                            left=0.0, right=0.0)
        out = np.where(inside, out, 0.0)
        return out if out.ndim else float(out)

    __call__ = eval

    def cumulative_area(self, t):
        """G(t) = integral of g from -T/2 to t.  G(T/2) equals ``area``."""
        t = np.asarray(t, dtype=float)
        T = self.duration
        u = np.clip(t, -T / 2, T / 2)
        if self.kind == "boxcar":
            out = self.area * (u / T + 0.5)
        elif self.kind == "trapezoid":
            dT = self.turn_on_fraction * T
            h = self.area / (T - dT)
            out = np.zeros_like(u)
            s = u + T / 2  # distance from turn-on
            ramp_up = s <= dT
            plateau = (s > dT) & (s <= T - dT)
            ramp_dn = s > T - dT
            out[ramp_up] = 0.5 * h * s[ramp_up] ** 2 / dT
            out[plateau] = h * (s[plateau] - dT / 2)
            s2 = T - s[ramp_dn]  # distance from turn-off
            out[ramp_dn] = self.area - 0.5 * h * s2**2 / dT
        elif self.kind == "triangle":
            out = np.zeros_like(u)
            left = u <= 0
            s = u[left] + T / 2
            out[left] = 2 * self.area * s**2 / T**2
            s2 = T / 2 - u[~left]
            out[~left] = self.area - 2 * self.area * s2**2 / T**2
        elif self.kind == "raised-cosine":
            out = self.area * (u / T + 0.5 + np.sin(2 * np.pi * u / T) / (2 * np.pi))
        else:
            ts, vs = self.sample_times, self.sample_values
            cum = np.concatenate([[0.0], np.cumsum(np.diff(ts) * 0.5 * (vs[1:] + vs[:-1]))])
            idx = np.clip(np.searchsorted(ts, u, side="right") - 1, 0, ts.size - 2)
            gi = vs[idx]
            gu = np.interp(u, ts, vs)
            out = cum[idx] + (u - ts[idx]) * 0.5 * (gi + gu)
        return out if out.ndim else float(out)

    def breakpoints(self) -> np.ndarray:
        """Corner points of g inside the support, used to seed quadrature."""
        T = self.duration
        pts = [-T / 2, T / 2]
        if self.kind == "trapezoid":
            dT = self.turn_on_fraction * T
            pts += [-T / 2 + dT, T / 2 - dT]
        elif self.kind == "triangle":
            pts.append(0.0)
        return np.unique(np.asarray(pts))


def eval_g(profile: CouplingProfile, t):
    return profile.eval(t)


def cumulative_area(profile: CouplingProfile, t):
    return profile.cumulative_area(t)


def fourier_transform(profile: CouplingProfile, omega):
    """Closed-form cosine transform g~(omega) = int cos(omega t) g(t) dt.

    Normalized windows give g~(0) = 1.  Raises for sampled windows, which
    have no closed form.
    """
    if profile.kind not in BUILTIN_KINDS:
        raise NoAnalyticTransformError(
            "sampled profiles have no analytic transform; "
            "use numeric_fourier_transform"
        )
    omega = np.asarray(omega, dtype=float)
    T = profile.duration
    x = omega * T / 2.0
    if profile.kind == "boxcar":
        out = _sinc(x)
    elif profile.kind == "trapezoid":
        dT = profile.turn_on_fraction * T
        out = _sinc(omega * dT / 2.0) * _sinc(omega * (T - dT) / 2.0)
    elif profile.kind == "triangle":
        out = _sinc(x / 2.0) ** 2
    else:  # raised cosine
        out = _raised_cosine_transform(x)
    out = profile.area * out
    return out if out.ndim else float(out)


def _raised_cosine_transform(x):
    """sinc(x) / (1 - (x/pi)^2) with the removable pole at |x| = pi.

    Direct evaluation cancels catastrophically near the pole, so close to
    |x| = pi the algebraically identical form
    pi^2 sinc(x - pi) / (x (x + pi)) is used, which is regular there.
    """
    x = np.abs(np.asarray(x, dtype=float))
    near = np.abs(x - np.pi) < 0.5
    out = np.empty_like(x)
    xs = x[~near]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~near] = _sinc(xs) / (1.0 - (xs / np.pi) ** 2)
    xn = x[near]
    out[near] = np.pi**2 * _sinc(xn - np.pi) / (xn * (xn + np.pi))
    return out


def numeric_fourier_transform(profile: CouplingProfile, omega: float) -> float:
    """Adaptive-quadrature cosine transform, absolute tolerance 1e-10.

    The integrand is smooth except at the window's corner points, which are
    passed to the integrator as subdivision seeds.
    """
    omega = float(omega)
    T = profile.duration
    pts = profile.breakpoints()
    if profile.kind == "sampled":
        # interior samples are kinks of the linear interpolant
        inner = profile.sample_times[1:-1]
        if inner.size <= 200:
            pts = np.unique(np.concatenate([pts, inner]))
    value, err = quad(
        lambda t: math.cos(omega * t) * profile.eval(t),
        -T / 2, T / 2,
        points=pts[1:-1] if pts.size > 2 else None,
        epsabs=1e-12, epsrel=1e-12,
        limit=_QUAD_LIMIT,
    )
    if err > _QUAD_ABS_TOL:
        raise QuadratureAccuracyError(
            f"quadrature for omega={omega} reached error {err:.3e} > {_QUAD_ABS_TOL}",
            error_estimate=err,
        )
    return value
