"""Symmetric polynomial wells and their classical mechanics.

A well is an even polynomial V(x) = sum_m c_m x^(2m) with V(0) = 0 and a
confining leading term.  Everything downstream is driven by the squared
classical momentum

    p^2(x, E) = 2 (E - V(x)),

its positive turning point t2 (and mirror t1 = -t2), and action integrals of
|p| on either side of t2.  The turning point is a square-root zero of p^2, so
all action integrals substitute x = t2 -/+ u^2, which makes the integrands
analytic and lets fixed-order Gauss-Legendre quadrature converge to machine
accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import brentq

from .errors import NonPositiveEnergy, OutsideAllowedRegion

__all__ = [
    "SymmetricPotential",
    "TurningPoints",
    "momentum_sq",
    "turning_point",
    "classical_action",
    "total_action",
    "action_to_turning",
    "forbidden_action",
    "forbidden_point",
]

# Gauss-Legendre order for the substituted action integrands.  They are
# analytic, so this is far into the geometric-convergence regime.
_GL_ORDER = 96


@lru_cache(maxsize=8)
def _gl_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


class SymmetricPotential:
    """Even polynomial well V(x) = sum c_m x^(2m) with V(0) = 0.

    Parameters
    ----------
    coefficients : mapping
        Maps the even power 2m (integer, m >= 1) to the real coefficient c_m.
        The coefficient of the largest power must be positive so that
        V(x) -> +inf as |x| -> inf.
    hbar : float, optional
        Planck constant entering the wave equation; defaults to 1 (atomic
        units, as in all bundled benchmarks).
    """

    __slots__ = ("_terms", "_hbar")

    def __init__(self, coefficients: Mapping[int, float], hbar: float = 1.0):
        terms = []
        for power, coeff in coefficients.items():
            power = int(power)
            if power < 2 or power % 2 != 0:
                raise ValueError(
                    f"potential powers must be even integers >= 2, got {power}"
                )
            coeff = float(coeff)
            terms.append((power, coeff))
        if not terms:
            raise ValueError("potential needs at least one term")
        terms.sort()
        if len({p for p, _ in terms}) != len(terms):
            raise ValueError("duplicate power in potential coefficients")
        if terms[-1][1] <= 0.0:
            raise ValueError(
                "leading coefficient must be positive (confining well)"
            )
        if not hbar > 0.0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "_terms", tuple(terms))
        object.__setattr__(self, "_hbar", float(hbar))

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("SymmetricPotential is immutable")

    def __reduce__(self):
        # The immutability guard also blocks pickle's slot-state restore,
        # so rebuild through the constructor instead.
        return (type(self), (dict(self._terms), self._hbar))

    @property
    def coefficients(self) -> dict[int, float]:
        return dict(self._terms)

    @property
    def terms(self) -> tuple[tuple[int, float], ...]:
        return self._terms

    @property
    def hbar(self) -> float:
        return self._hbar

    @property
    def max_power(self) -> int:
        return self._terms[-1][0]

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_text(cls, text: str, hbar: float = 1.0) -> "SymmetricPotential":
        """Parse the ``2m:c_m`` comma-separated format, e.g. ``"2:0.5,10:500"``."""
        coeffs: dict[int, float] = {}
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            try:
                power_s, coeff_s = chunk.split(":")
                power = int(power_s)
                coeff = float(coeff_s)
            except ValueError as exc:
                raise ValueError(f"bad potential term {chunk!r}") from exc
            if power in coeffs:
                raise ValueError(f"duplicate power {power} in {text!r}")
            coeffs[power] = coeff
        if not coeffs:
            raise ValueError(f"empty potential spec {text!r}")
        return cls(coeffs, hbar=hbar)

    def to_text(self) -> str:
        """Inverse of :meth:`from_text`; deterministic ordering by power."""
        return ",".join(f"{p}:{c!r}" for p, c in self._terms)

    # -- evaluation -----------------------------------------------------------

    def value(self, x):
        """V(x); accepts scalars or arrays, real or complex."""
        x = np.asarray(x)
        out = np.zeros_like(x, dtype=x.dtype if x.dtype.kind == "c" else float)
        for power, coeff in self._terms:
            out = out + coeff * x**power
        return out if out.shape else out[()]

    def derivative(self, x, order: int = 1):
        """Exact order-th derivative of V; zero beyond the polynomial degree."""
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        if order == 0:
            return self.value(x)
        x = np.asarray(x)
        out = np.zeros_like(x, dtype=x.dtype if x.dtype.kind == "c" else float)
        for power, coeff in self._terms:
            if order > power:
                continue
            fall = math.perm(power, order)
            out = out + coeff * fall * x ** (power - order)
        return out if out.shape else out[()]

    # -- identity -------------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, SymmetricPotential)
            and self._terms == other._terms
            and self._hbar == other._hbar
        )

    def __hash__(self):
        return hash((self._terms, self._hbar))

    def __repr__(self):
        return f"SymmetricPotential({self.coefficients!r}, hbar={self._hbar!r})"


@dataclass(frozen=True)
class TurningPoints:
    """Pair of classical turning points at a given energy; t1 = -t2 < 0 < t2."""

    t1: float
    t2: float
    energy: float


def momentum_sq(V: SymmetricPotential, E: float, x):
    """Squared classical momentum p^2(x, E) = 2 (E - V(x)); even in x."""
    return 2.0 * (E - V.value(x))


def turning_point(V: SymmetricPotential, E: float) -> TurningPoints:
    """Positive root t2 of p^2(., E), bracketed and polished to ~1e-14 relative.

    Raises
    ------
    NonPositiveEnergy
        If E <= 0 (the well bottom sits at V(0) = 0).
    """
    if not E > 0.0:
        raise NonPositiveEnergy(f"turning point needs E > 0, got {E}")
    hi = 1.0
    for _ in range(200):
        if V.value(hi) > E:
            break
        hi *= 2.0
    else:  # pragma: no cover - confinement guarantees termination
        raise NonPositiveEnergy("could not bracket the turning point")
    t2 = brentq(lambda x: V.value(x) - E, 0.0, hi, xtol=1e-300, rtol=1e-15)
    # One Newton polish; V' > 0 at a simple turning point.
    dv = V.derivative(t2)
    if dv != 0.0:
        t2 -= (V.value(t2) - E) / dv
    return TurningPoints(t1=-t2, t2=t2, energy=E)


def _sqrtq(values: np.ndarray) -> np.ndarray:
    # Clip roundoff-negative p^2 at the substituted endpoint before sqrt.
    return np.sqrt(np.maximum(values, 0.0))


def action_to_turning(V: SymmetricPotential, E: float, x, t2: float | None = None):
    """Allowed-side action integral(s) of p from x up to t2.

    Computes A(x) = int_x^t2 p dx' for -t2 <= x <= t2 (scalars or arrays)
    via the substitution x' = t2 - u^2 which absorbs the square-root zero of
    p at the turning point.  Negative x uses A(x) = 2 A(0) - A(-x).
    """
    if t2 is None:
        t2 = turning_point(V, E).t2
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)
    if np.any(np.abs(xs) > t2 * (1.0 + 1e-9) + 1e-300):
        raise OutsideAllowedRegion(
            f"action requested outside [{-t2}, {t2}] at E={E}"
        )
    xs = np.clip(xs, -t2, t2)
    g, w = _gl_nodes(_GL_ORDER)

    def _half(xpos: np.ndarray) -> np.ndarray:
        # int_x^t2 p dx' for 0 <= x <= t2, vectorized over x
        umax = np.sqrt(np.maximum(t2 - xpos, 0.0))
        u = 0.5 * umax[None, :] * (g[:, None] + 1.0)
        q = momentum_sq(V, E, t2 - u * u)
        vals = 2.0 * u * _sqrtq(q)
        return 0.5 * umax * np.einsum("i,ij->j", w, vals)

    out = np.empty_like(xs)
    pos = xs >= 0.0
    if np.any(pos):
        out[pos] = _half(xs[pos])
    if np.any(~pos):
        a0 = _half(np.zeros(1))[0]
        out[~pos] = 2.0 * a0 - _half(-xs[~pos])
    return out[0] if scalar else out


def total_action(V: SymmetricPotential, E: float, t2: float | None = None) -> float:
    """Full-period action int_t1^t2 p dx = 2 int_0^t2 p dx; monotone in E."""
    if t2 is None:
        t2 = turning_point(V, E).t2
    return 2.0 * float(action_to_turning(V, E, 0.0, t2=t2))


def classical_action(V: SymmetricPotential, E: float, x: float) -> float:
    """Classical action S(x) = int_t1^x p dx' with S(t1) = 0.

    Raises
    ------
    OutsideAllowedRegion
        If x is not inside [t1, t2].
    """
    t2 = turning_point(V, E).t2
    if abs(x) > t2 * (1.0 + 1e-9):
        raise OutsideAllowedRegion(f"x={x} outside [{-t2}, {t2}]")
    a0 = float(action_to_turning(V, E, 0.0, t2=t2))
    ax = float(action_to_turning(V, E, x, t2=t2))
    return 2.0 * a0 - ax


def forbidden_action(V: SymmetricPotential, E: float, x, t2: float | None = None):
    """Forbidden-side integral(s) int_t2^x |p| dx' for x >= t2.

    Same square-root-absorbing substitution as :func:`action_to_turning`,
    with x' = t2 + u^2.
    """
    if t2 is None:
        t2 = turning_point(V, E).t2
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)
    if np.any(xs < t2 * (1.0 - 1e-12)):
        raise OutsideAllowedRegion(f"forbidden action needs x >= t2={t2}")
    umax = np.sqrt(np.maximum(xs - t2, 0.0))
    g, w = _gl_nodes(_GL_ORDER)
    u = 0.5 * umax[None, :] * (g[:, None] + 1.0)
    q = momentum_sq(V, E, t2 + u * u)
    vals = 2.0 * u * _sqrtq(-q)
    out = 0.5 * umax * np.einsum("i,ij->j", w, vals)
    return out[0] if scalar else out


def forbidden_point(V: SymmetricPotential, E: float, target: float,
                    t2: float | None = None) -> float:
    """Abscissa x > t2 where the forbidden-side action reaches ``target``."""
    if t2 is None:
        t2 = turning_point(V, E).t2
    if target <= 0.0:
        return t2
    hi = t2 + max(t2, 1.0)
    for _ in range(200):
        if forbidden_action(V, E, hi, t2=t2) > target:
            break
        hi = t2 + 2.0 * (hi - t2)
    else:  # pragma: no cover
        raise OutsideAllowedRegion("forbidden action target unreachable")
    return brentq(
        lambda x: float(forbidden_action(V, E, x, t2=t2)) - target,
        t2, hi, rtol=1e-12,
    )
