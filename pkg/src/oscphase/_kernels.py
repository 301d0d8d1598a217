"""Compiled inner loops.

Everything here is plain array-in/array-out numerics with no object state, so
the jitted functions stay trivially cacheable across processes.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["numerov_end", "numerov_full", "riccati_sweep"]


@njit(cache=True)
def numerov_end(f: np.ndarray, h: float, psi0: float, psi1: float):
    """Three-point sweep for psi'' = f psi; returns (node count, psi at end).

    Interior sign changes of psi on (0, L) are counted; a node falling exactly
    on a grid point counts once.  Values are rescaled if they grow huge, which
    leaves both outputs' signs and the count unchanged.
    """
    n = f.size
    w0 = 1.0 - (h * h / 12.0) * f[0]
    w1 = 1.0 - (h * h / 12.0) * f[1]
    u_prev = w0 * psi0
    u_curr = w1 * psi1
    psi_curr = psi1
    nodes = 0
    if psi0 != 0.0 and (psi0 * psi1 < 0.0 or psi1 == 0.0):
        # psi0 = 0 starts (odd parity) do not count the origin itself
        nodes += 1
    for j in range(1, n - 1):
        u_next = 2.0 * u_curr - u_prev + h * h * f[j] * psi_curr
        w = 1.0 - (h * h / 12.0) * f[j + 1]
        psi_next = u_next / w
        if psi_curr * psi_next < 0.0 or (psi_next == 0.0 and psi_curr != 0.0):
            nodes += 1
        if abs(psi_next) > 1e250:
            scale = 1e-200
            u_next *= scale
            u_curr *= scale
            psi_next *= scale
            psi_curr *= scale
        u_prev = u_curr
        u_curr = u_next
        psi_curr = psi_next
    return nodes, psi_curr


@njit(cache=True)
def numerov_full(f: np.ndarray, h: float, psi0: float, psi1: float):
    """Same sweep as :func:`numerov_end` but storing the whole solution."""
    n = f.size
    psi = np.empty(n)
    psi[0] = psi0
    psi[1] = psi1
    w_prev = 1.0 - (h * h / 12.0) * f[0]
    w_curr = 1.0 - (h * h / 12.0) * f[1]
    u_prev = w_prev * psi0
    u_curr = w_curr * psi1
    for j in range(1, n - 1):
        u_next = 2.0 * u_curr - u_prev + h * h * f[j] * psi[j]
        w = 1.0 - (h * h / 12.0) * f[j + 1]
        psi[j + 1] = u_next / w
        u_prev = u_curr
        u_curr = u_next
    return psi


# Seven-point Gauss-Legendre rule mapped to [0, 1]; exact through degree 13,
# which covers the degree <= 12 polynomial part of the linearized Riccati
# right-hand side (squared degree-6 field interpolant) with room to spare.
_GL7 = np.polynomial.legendre.leggauss(7)
_GL7_NODES = 0.5 * (_GL7[0] + 1.0)
_GL7_WEIGHTS = 0.5 * _GL7[1]


@njit(cache=True)
def _wavenumber_sq(x: float, k0: float, kexp: np.ndarray, kcoef: np.ndarray):
    """k^2(x) = k0 - sum_j kcoef[j] x**kexp[j], evaluated exactly."""
    out = k0
    for j in range(kexp.size):
        out = out - kcoef[j] * x ** kexp[j]
    return out


@njit(cache=True)
def _poly_val(c: np.ndarray, u: float):
    """Degree-6 polynomial sum_k c[k] u^k by Horner."""
    r = c[6]
    for k in range(5, -1, -1):
        r = r * u + c[k]
    return r


@njit(cache=True)
def _poly_cum(c: np.ndarray, u: float):
    """Exact antiderivative int_0^u of the degree-6 polynomial c."""
    r = c[6] / 7.0
    for k in range(5, -1, -1):
        r = r * u + c[k] / (k + 1.0)
    return r * u


@njit(cache=True)
def _riccati_step(c, x_left, h, u0, u1, m0, k0, kexp, kcoef):
    """Advance M across [u0, u1] of one cell (local coordinate u in [0, 1]).

    The linearized equation d_x M = a(x) + b(x) M with a = i (k^2 + P^2) and
    b = -2 i P, P the previous-iterate interpolant, is solved exactly by an
    integrating factor; the inhomogeneous integral is done with the 7-point
    Gauss rule and the factor exponent is the exact antiderivative of the
    interpolant.  All exponents have nonpositive real part in the forbidden
    region (P ~ -i|k| there), so the scheme is outward-stable.
    """
    cu1 = _poly_cum(c, u1)
    du = u1 - u0
    acc = 0.0 + 0.0j
    for j in range(7):
        s = u0 + du * _GL7_NODES[j]
        p_prev = _poly_val(c, s)
        ksq = _wavenumber_sq(x_left + h * s, k0, kexp, kcoef)
        grow = np.exp(-2j * h * (cu1 - _poly_cum(c, s)))
        acc += _GL7_WEIGHTS[j] * grow * 1j * (ksq + p_prev * p_prev)
    g0 = np.exp(-2j * h * (cu1 - _poly_cum(c, u0)))
    return g0 * m0 + h * du * acc


@njit(cache=True)
def _riccati_cell(c, x_left, h, m0, k0, kexp, kcoef, nsub):
    """Cross one cell in ``nsub`` equal exponential steps."""
    m = m0
    for j in range(nsub):
        m = _riccati_step(c, x_left, h, j / nsub, (j + 1) / nsub,
                          m, k0, kexp, kcoef)
    return m


@njit(cache=True)
def riccati_sweep(coef, x_left, h, m_init, k0, kexp, kcoef, local_tol):
    """Outward sweep of the linearized Riccati equation over all cells.

    Parameters are the per-cell degree-6 interpolant coefficients of the
    previous iterate (``coef[i, k]`` multiplies u^k on cell i), the cell left
    abscissas, the uniform spacing, the origin value, the wavenumber data of
    :func:`_wavenumber_sq`, and the per-cell relative accuracy target.  Each
    cell is crossed with a doubling number of substeps until two consecutive
    refinements agree to ``local_tol``; the step is exact for constant
    coefficients, so a single substep normally suffices.
    """
    ncell = coef.shape[0]
    out = np.empty(ncell + 1, dtype=np.complex128)
    out[0] = m_init
    m = m_init
    for i in range(ncell):
        c = coef[i]
        xl = x_left[i]
        prev = _riccati_cell(c, xl, h, m, k0, kexp, kcoef, 1)
        nsub = 2
        for _ in range(8):
            cur = _riccati_cell(c, xl, h, m, k0, kexp, kcoef, nsub)
            done = abs(cur - prev) <= local_tol * (1.0 + abs(cur))
            prev = cur
            if done:
                break
            nsub *= 2
        m = prev
        out[i + 1] = m
    return out
