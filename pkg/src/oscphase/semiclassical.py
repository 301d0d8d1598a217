"""Semiclassical quantization of symmetric wells at every implemented order.

Four related approximations to the exact phase are provided:

* first-order quantization from the classical action alone
  (:func:`wkb_quantize`, :func:`nsc`);
* higher-order quantization from contour integrals of the exact correction
  hierarchy (:func:`dunham_integral`, :func:`dunham_quantize`);
* the uniform phase built on an Airy carrier, valid through the turning
  point (:func:`airy_xi0`, :func:`airy_uniform_phase`, :func:`airy_quantize`);
* the asymptotic boundary-condition series for the exact phase derivative
  at the origin (:func:`bc_series`), which seeds the exact solver.

The scale-class ambiguity of semiclassical phases is made explicit by
:func:`sc_phase_ambiguity`.

Conventions: all phases live on the half line [0, x_max], with the mirror
identity sigma(-x) = sigma(inf) - sigma(x) supplying the other half; the
half-line phase accumulated from the far forbidden region is combined into
the full-line, nondecreasing phase reported in :class:`UniformPhase`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import airy

from . import diffalg
from .errors import ContourTooTight, NoConvergence, PhasePole, ZeroMomentumAtOrigin
from .model import (
    SymmetricPotential,
    action_to_turning,
    forbidden_action,
    total_action,
    turning_point,
)

__all__ = [
    "BoundaryCondition",
    "BoundaryMethod",
    "ErmakovParameters",
    "Terminant",
    "UniformPhase",
    "airy_quantize",
    "airy_uniform_phase",
    "airy_xi0",
    "bc_series",
    "dunham_integral",
    "dunham_quantize",
    "nsc",
    "sc_phase_ambiguity",
    "wkb_quantize",
]


# -- domain types -------------------------------------------------------------


@dataclass(frozen=True)
class UniformPhase:
    """Airy-carrier uniform phase sampled along a half-line grid.

    Fields
    ------
    grid : ndarray
        Increasing abscissas, normally spanning [0, x_max].
    xi0 : ndarray
        Carrier argument along the grid; negative on the classically
        allowed side, zero at the turning point, positive beyond.
    sigma_sc : ndarray
        Unwrapped full-line phase along the grid; nondecreasing.
    dsigma_sc : ndarray
        Derivative of ``sigma_sc``, computed analytically (not by
        differencing the phase samples).
    energy : float
        Energy at which the phase was computed.
    """

    grid: np.ndarray
    xi0: np.ndarray
    sigma_sc: np.ndarray
    dsigma_sc: np.ndarray
    energy: float


class BoundaryMethod(enum.Enum):
    """How a boundary value of the phase derivative at x = 0 was obtained."""

    WKB_P0 = "wkb_p0"
    ASYMPTOTIC_SERIES = "asymptotic_series"
    HARMONIC_EXACT = "harmonic_exact"


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary value of the exact phase derivative at the origin.

    Fields
    ------
    value : float
        The boundary value of the phase derivative at x = 0; positive.
    order_used : int
        Index of the last series term kept (0 when only the classical
        momentum was used).
    method : BoundaryMethod
        Provenance of the value.
    terms : tuple of float
        The retained raw series contributions, term k scaling with
        hbar**(2k); ``value`` halves the last entry when two or more terms
        were kept, the standard truncation of an asymptotic series.
    """

    value: float
    order_used: int
    method: BoundaryMethod
    terms: tuple


@dataclass(frozen=True)
class ErmakovParameters:
    """Scale-class parameters (I, c, W) of an amplitude-phase decomposition.

    Only the combinations I*c and W/I are meaningful: rescaling the
    amplitude by kappa maps (I, c, W) to (kappa**2 I, c / kappa**2, W), so
    individual members are representatives of a class.
    """

    invariant_I: float
    c: float
    wronskian_W: float


class Terminant(enum.Enum):
    """Truncation rule for the resummed quantization series."""

    NONE = "none"
    STIELTJES_HALF = "stieltjes_half"


# -- first-order quantization -------------------------------------------------


def _bracket_upward(f, lo: float, hi: float, max_doublings: int = 80):
    """Expand [lo, hi] upward until f changes sign; f(lo) must be negative."""
    flo = f(lo)
    fhi = f(hi)
    for _ in range(max_doublings):
        if fhi >= 0.0:
            return lo, hi, flo, fhi
        lo, flo = hi, fhi
        hi *= 2.0
        fhi = f(hi)
    raise NoConvergence(f"no sign change located below {hi}")


def wkb_quantize(V: SymmetricPotential, n: int) -> float:
    """First-order semiclassical energy of level n.

    Solves  S(E) = pi * hbar * (n + 1/2)  for E, where S is the action
    integral between the turning points; the left side is strictly
    increasing in E for a confining well, so bracketed root finding cannot
    fail.  Exact for the harmonic well.
    """
    if n < 0:
        raise ValueError("level index must be >= 0")
    target = math.pi * V.hbar * (n + 0.5)

    def f(E):
        return total_action(V, E) - target

    lo, hi, _, _ = _bracket_upward(f, 1e-12, max(V.hbar, 1.0))
    root = brentq(f, lo, hi, rtol=1e-14, maxiter=200)
    return float(root)


def nsc(V: SymmetricPotential, E: float) -> float:
    """First-order semiclassical oscillation number at energy E.

    Returns S(E) / (pi * hbar) + 1/2; the first-order quantization
    condition holds exactly when this equals the integer n + 1.  Strictly
    increasing in E.
    """
    return total_action(V, E) / (math.pi * V.hbar) + 0.5


# -- higher-order quantization via contour quadrature -------------------------

_CONTOUR_START = 64
_CONTOUR_MAX = 4096
_CONTOUR_RTOL = 5e-13
_CONTOUR_VARIATION = 0.5


def _contour_nodes(t2: float, shape: float, n: int):
    """Clockwise confocal ellipse around [-t2, t2] with semi-minor shape*t2."""
    b = shape * t2
    a = t2 * math.sqrt(1.0 + shape * shape)
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    z = a * np.cos(theta) - 1j * b * np.sin(theta)
    dz = -a * np.sin(theta) - 1j * b * np.cos(theta)
    return z, dz


def _contour_values(V, E, expr, t2, shape, n):
    z, dz = _contour_nodes(t2, shape, n)
    order = max(expr.max_derivative_order, 0)
    jets = [2.0 * (E - V.value(z))]
    for nd in range(1, order + 1):
        jets.append(-2.0 * np.asarray(V.derivative(z, nd), dtype=complex))
    f = diffalg._evaluate_array(expr, z, jets, t2, diffalg.Branch.CUT)
    return f * dz


def _resolved(values):
    """True when adjacent contour nodes resolve the integrand's peaks.

    On a well-separated contour the node-to-node variation halves with
    every doubling of the node count; on a contour hugging a turning
    point it stays of order the peak height no matter how fine the grid.
    """
    variation = np.abs(np.diff(np.append(values, values[0])))
    peak = max(float(np.max(np.abs(values))), 1e-300)
    return float(np.max(variation)) <= _CONTOUR_VARIATION * peak


def dunham_integral(
    V: SymmetricPotential, E: float, k: int, shape: float = 0.5
) -> complex:
    """Contour integral of the order-2k correction term around the cut.

    Integrates the order-2k term of the correction hierarchy over a closed
    clockwise ellipse with foci at the turning points and semi-minor axis
    ``shape * t2``, by the trapezoid rule in the contour parameter (which
    converges spectrally for analytic integrands).  The k = 0 integral
    equals twice the action between the turning points; for the harmonic
    well every k >= 1 integral vanishes.

    Raises
    ------
    ContourTooTight
        If the integrand still varies too strongly between adjacent nodes
        at the maximum refinement, which signals a contour hugging the
        turning points (or passing too near another singularity).
    """
    if E <= 0.0:
        raise ValueError("energy must be positive")
    if k < 0:
        raise ValueError("correction index must be >= 0")
    if not 0.0 < shape:
        raise ValueError("shape must be positive")
    expr = diffalg.riccati_term(2 * k)
    t2 = turning_point(V, E).t2
    n = _CONTOUR_START
    values = _contour_values(V, E, expr, t2, shape, n)
    total = np.mean(values) * 2.0 * math.pi
    while n < _CONTOUR_MAX:
        n *= 2
        values = _contour_values(V, E, expr, t2, shape, n)
        refined = np.mean(values) * 2.0 * math.pi
        scale = max(1.0, float(np.max(np.abs(values))) * 2.0 * math.pi)
        done = abs(refined - total) <= _CONTOUR_RTOL * scale and _resolved(values)
        total = refined
        if done:
            break
    if not _resolved(values):
        raise ContourTooTight(
            f"integrand varies by more than {_CONTOUR_VARIATION:.0%} between "
            f"adjacent nodes at n={n}; widen the contour (shape={shape})"
        )
    return complex(total)


def dunham_quantize(
    V: SymmetricPotential,
    n: int,
    k_max: int,
    terminant: Terminant | str = Terminant.NONE,
    shape: float = 0.5,
) -> float:
    """Resummed quantization through correction order 2*k_max.

    Solves

        sum_{k <= k_max} (i hbar)**(2k) * dunham_integral(E, k)
            = 2 pi hbar (n + 1/2)

    for E by damped Newton iteration with a bisection fallback on a
    maintained sign-change bracket.  With ``terminant = stieltjes_half``
    the sum is cut at the first correction whose magnitude grows over its
    predecessor and the last retained term is halved, the standard
    truncation of an asymptotic series; with ``none`` every term through
    k_max enters at full weight.

    Raises
    ------
    NoConvergence
        After 200 iterations without meeting the relative tolerance 1e-12.
    """
    if n < 0:
        raise ValueError("level index must be >= 0")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    terminant = Terminant(terminant)
    hbar = V.hbar
    target = 2.0 * math.pi * hbar * (n + 0.5)

    def f(E: float) -> float:
        terms = [
            (-1.0) ** k * hbar ** (2 * k) * dunham_integral(V, E, k, shape=shape).real
            for k in range(k_max + 1)
        ]
        if terminant is Terminant.STIELTJES_HALF:
            # Truncate where the asymptotic series starts to diverge and
            # halve the last retained term (never the leading action).
            kept = 1
            while kept <= k_max and abs(terms[kept]) <= abs(terms[kept - 1]):
                kept += 1
            terms = terms[:kept]
            if kept > 1:
                terms[-1] *= 0.5
        return sum(terms) - target

    # Bracket the root by walking from the first-order estimate in the
    # downhill direction of f (f is increasing in E).
    prev_E = wkb_quantize(V, n)
    prev_f = f(prev_E)
    if prev_f == 0.0:
        return prev_E
    direction = -1.0 if prev_f > 0.0 else 1.0
    step = 0.1 * max(prev_E, 1e-6)
    for _ in range(60):
        cand = max(prev_E + direction * step, 1e-12)
        fc = f(cand)
        if fc == 0.0:
            return cand
        if fc * prev_f < 0.0:
            if prev_E < cand:
                lo, flo, hi = prev_E, prev_f, cand
            else:
                lo, flo, hi = cand, fc, prev_E
            break
        prev_E, prev_f = cand, fc
        step *= 1.6
    else:
        raise NoConvergence("could not bracket the quantization root")

    # Damped Newton with the bracket as a safety net.  A small step only
    # counts as convergence when it was a genuine Newton step; a bisection
    # fallback candidate can coincide with the current iterate, so for
    # those the bracket width is the termination measure.
    E = 0.5 * (lo + hi)
    fe = f(E)
    for _ in range(200):
        h = 1e-6 * max(abs(E), 1e-3)
        slope = (f(E + h) - fe) / h
        newton = E - fe / slope if slope else math.nan
        from_newton = math.isfinite(newton) and lo < newton < hi
        candidate = newton if from_newton else 0.5 * (lo + hi)
        fc = f(candidate)
        # Damp: retreat halfway toward the bracket midpoint while |f| grows.
        for _ in range(8):
            if not from_newton or abs(fc) <= abs(fe):
                break
            candidate = 0.5 * (candidate + 0.5 * (lo + hi))
            fc = f(candidate)
        if fc * flo < 0.0:
            hi = candidate
        else:
            lo, flo = candidate, fc
        tol = 1e-12 * max(1.0, abs(candidate))
        step_ok = from_newton and abs(candidate - E) <= tol
        E, fe = candidate, fc
        if step_ok or hi - lo <= tol or fc == 0.0:
            return E
    raise NoConvergence("quantization root not found in 200 iterations")


# -- Airy-carrier uniform phase -----------------------------------------------

# First zero of Bi on the negative axis; between it and the turning point
# the continued arctangent lies in (pi/2, pi), beyond -1.5 the asymptotic
# guide takes over (Ai stays positive until -2.338, so the two-argument
# arctangent is continuous on xi0 >= -1.5).
_GUIDE_SWITCH = -1.5


def airy_xi0(V: SymmetricPotential, E: float, x):
    """Carrier argument of the uniform phase at x (scalar or array).

    Negative in the classically allowed region, zero at the turning point,
    positive beyond; scales the action so that the carrier reproduces the
    exact first-order phase away from the turning point.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    t2 = turning_point(V, E).t2
    out = np.empty_like(xv)
    allowed = xv <= t2
    if np.any(allowed):
        action = action_to_turning(V, E, xv[allowed], t2=t2)
        out[allowed] = -((1.5 * action / V.hbar) ** (2.0 / 3.0))
    if np.any(~allowed):
        action = forbidden_action(V, E, xv[~allowed], t2=t2)
        out[~allowed] = (1.5 * action / V.hbar) ** (2.0 / 3.0)
    return float(out[0]) if scalar else out


def _half_line_phase(V, E, x, t2):
    """Mirrored half-line phase m(x), anchored to 0 deep in the forbidden side.

    m decreases from its origin value to 0 as x runs to +infinity; at the
    turning point m = pi/6 exactly.  Returns (m, xi0, dm_dx).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = np.asarray(airy_xi0(V, E, x))
    xi = np.atleast_1d(xi)
    ai, _, bi, _ = airy(xi)
    m = np.empty_like(xi)
    near = xi >= _GUIDE_SWITCH
    m[near] = np.arctan2(ai[near], bi[near])
    deep = ~near
    if np.any(deep):
        theta = np.arctan(ai[deep] / bi[deep])
        guide = action_to_turning(V, E, x[deep], t2=t2) / V.hbar + 0.25 * math.pi
        m[deep] = theta + math.pi * np.round((guide - theta) / math.pi)
    # Analytic derivative: dm/dx = -xi0' / (pi (Ai^2 + Bi^2)).
    q = 2.0 * (E - np.asarray(V.value(x), dtype=float))
    absxi = np.abs(xi)
    tiny = absxi < 1e-9
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.sqrt(np.abs(q)) / (V.hbar * np.sqrt(absxi))
    if np.any(tiny):
        slope[tiny] = (2.0 * V.derivative(t2)) ** (1.0 / 3.0) / V.hbar ** (2.0 / 3.0)
    dm = -slope / (math.pi * (ai * ai + bi * bi))
    return m, xi, dm


def airy_uniform_phase(V: SymmetricPotential, E: float, grid) -> UniformPhase:
    """Uniform phase along a half-line grid, unwrapped and nondecreasing.

    The phase is anchored so that its full-line value vanishes far to the
    left; on the half line this makes sigma_sc(x) = 2 m(0) - m(x) with m
    the mirrored decreasing half-line phase.  Points left of the origin are
    accepted (for mirror-identity checks) and filled with m(-x).

    The branch of the arctangent is selected pointwise: the two-argument
    arctangent is continuous down to xi0 = -1.5 (the carrier numerator
    stays positive there), and below that the first-order phase plus pi/4
    pins the branch, so no sequential continuity tracking is needed.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError("grid must be a one-dimensional array")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be strictly increasing")
    t2 = turning_point(V, E).t2
    m, xi, dm = _half_line_phase(V, E, np.abs(grid), t2)
    m0 = _half_line_phase(V, E, np.array([0.0]), t2)[0][0]
    left = grid < 0.0
    sigma = np.where(left, m, 2.0 * m0 - m)
    # On both sides d sigma / dx = -dm/d|x| : the mirror reflection of x
    # cancels the sign flip of the outer branch.
    return UniformPhase(
        grid=grid, xi0=xi, sigma_sc=sigma, dsigma_sc=-dm, energy=float(E)
    )


def airy_quantize(V: SymmetricPotential, n: int) -> float:
    """Energy at which the uniform phase accumulates (n+1) pi over the line.

    Solves m(0; E) = (n + 1) pi / 2 for E on the relevant arctangent
    branch, by bracketed secant iteration to relative tolerance 1e-12.
    """
    if n < 0:
        raise ValueError("level index must be >= 0")
    target = 0.5 * (n + 1) * math.pi

    def f(E: float) -> float:
        t2 = turning_point(V, E).t2
        return float(_half_line_phase(V, E, np.array([0.0]), t2)[0][0]) - target

    guess = wkb_quantize(V, n)
    lo, hi, flo, fhi = _bracket_upward(f, 0.2 * guess, 1.2 * guess)
    # Secant within the bracket, falling back to bisection when a step
    # leaves it.
    a, fa, b, fb = lo, flo, hi, fhi
    for _ in range(200):
        if abs(b - a) <= 1e-12 * max(1.0, abs(b)):
            break
        denom = fb - fa
        c = b - fb * (b - a) / denom if denom else 0.5 * (a + b)
        if not (min(a, b) < c < max(a, b)):
            c = 0.5 * (a + b)
        fc = f(c)
        if fc == 0.0:
            return c
        if fa * fc < 0.0:
            b, fb = c, fc
        else:
            a, fa = c, fc
    return 0.5 * (a + b)


# -- boundary-condition series ------------------------------------------------


def bc_series(V: SymmetricPotential, E: float, k_cap: int) -> BoundaryCondition:
    """Asymptotic series for the exact phase derivative at the origin.

    Evaluates the phase-derivative series terms at x = 0 (where odd
    derivatives of the squared momentum vanish by symmetry), keeps terms
    while the magnitudes of the nonzero entries decrease, caps the order at
    ``k_cap``, and halves the last kept term when two or more were kept.
    Exact zeros from jet gaps (a pure power well has no low-order
    derivatives at the origin) neither stop the series nor reset the size
    comparison, and trailing zeros are dropped so the halving rule lands on
    the last real contribution.  ``k_cap = 0`` reproduces the plain
    classical-momentum boundary value p(0).

    Raises
    ------
    ZeroMomentumAtOrigin
        If E <= V(0), which would make the leading term imaginary.
    """
    if k_cap < 0:
        raise ValueError("k_cap must be >= 0")
    if k_cap > diffalg.MAX_ORDER:
        raise ValueError(
            f"k_cap={k_cap} exceeds the maximum generated order {diffalg.MAX_ORDER}"
        )
    v0 = float(V.value(0.0))
    if E <= v0:
        raise ZeroMomentumAtOrigin(f"E={E} does not exceed V(0)={v0}")
    order = 2 * k_cap
    values = [2.0 * (E - v0)]
    for nd in range(1, order + 1):
        values.append(-2.0 * float(V.derivative(0.0, nd)))
    pt = diffalg.JetPoint(z=0.0, values=tuple(values))
    hbar2 = V.hbar * V.hbar
    terms = []
    last_nonzero = math.inf
    for k in range(k_cap + 1):
        term = diffalg.evaluate(diffalg.sigma_term(k), pt).real * hbar2**k
        if abs(term) > last_nonzero:
            break
        terms.append(term)
        if term != 0.0:
            last_nonzero = abs(term)
    while len(terms) > 1 and terms[-1] == 0.0:
        terms.pop()
    k_max = len(terms) - 1
    if k_max == 0:
        value = terms[0]
        method = BoundaryMethod.WKB_P0 if k_cap == 0 else BoundaryMethod.ASYMPTOTIC_SERIES
    else:
        value = sum(terms[:-1]) + 0.5 * terms[-1]
        method = BoundaryMethod.ASYMPTOTIC_SERIES
    return BoundaryCondition(
        value=float(value), order_used=k_max, method=method, terms=tuple(terms)
    )


# -- the scale-class ambiguity of semiclassical phases ------------------------


def sc_phase_ambiguity(S_x: float, phi: float, S_t2: float, I: float, c: float) -> float:
    """Semiclassical phase for an arbitrary scale-class choice (I, c).

    Returns the phase sigma satisfying

        cot(sigma) = cot(S_x + phi) - [cot(S_t2 + 2 phi) + 2 I c]

    on the branch that keeps sigma continuous in x, which ties the branch
    window of sigma to that of S_x + phi.  Choosing
    c = -cot(S_t2 + 2 phi) / (2 I) makes the bracket vanish and collapses
    the phase to S_x + phi, the optimal (oscillation-free) choice.

    Raises
    ------
    PhasePole
        When sin(S_x + phi) vanishes, where the cotangent relation is
        singular.
    """
    u = S_x + phi
    s = math.sin(u)
    if abs(s) < 1e-12:
        raise PhasePole(f"sin(S+phi)={s:.2e} at S+phi={u}")
    w = S_t2 + 2.0 * phi
    sw = math.sin(w)
    if abs(sw) < 1e-12:
        raise PhasePole(f"sin(S(t2)+2 phi)={sw:.2e} is singular")
    cot_sigma = math.cos(u) / s - (math.cos(w) / sw + 2.0 * I * c)
    window = math.floor(u / math.pi)
    return window * math.pi + (0.5 * math.pi - math.atan(cot_sigma))
