"""Exact differential algebra over jet variables of the squared momentum.

The quantum corrections to the classical phase are generated by two closely
related recurrences acting on the jet of Q(z) = p^2(z) = 2 (E - V(z)):

* the log-derivative (Riccati) hierarchy, whose order-k term ``riccati_term(k)``
  is the z-derivative of the k-th expansion coefficient of the exponent of the
  wavefunction; its contour integrals supply the higher-order action
  corrections used in resummed quantization;
* the phase-derivative series, whose order-k term ``sigma_term(k)`` is the
  coefficient of hbar^(2k) in the expansion of the exact phase derivative,
  obtained by equating powers of hbar^2 in

      D^2 + (hbar^2 / 2) * (D''/D - (3/2) (D'/D)^2) = Q.

Every term is a rational expression in the jet variables Q0, Q1, ..., Qd
(Qn standing for the n-th z-derivative of Q) together with a single formal
radical P subject to the rewrite rule P^2 -> Q0.  All coefficients are exact
rationals, so the only inexactness anywhere is the final floating-point
substitution performed by :func:`evaluate`.

Canonical form: each expression is a pair numerator / denominator where the
denominator is a monic, P-free monomial in the jet variables, the numerator
carries P to at most the first power in every monomial, and all monomial
factors common to both sides are cancelled.  Equality of canonical forms is
therefore structural equality.
"""

from __future__ import annotations

import cmath
import enum
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PoleAtPoint
from .model import SymmetricPotential, turning_point

__all__ = [
    "MAX_ORDER",
    "Branch",
    "JetExpression",
    "JetPoint",
    "evaluate",
    "jet_derivative",
    "riccati_term",
    "sigma_term",
]

MAX_ORDER = 10
"""Default cap on the order k accepted by the term generators."""


# -- monomials ----------------------------------------------------------------
#
# A monomial is an exponent tuple (e_P, e_Q0, e_Q1, ...) with trailing zeros
# stripped, so the empty tuple is the constant monomial.  Index 0 counts the
# radical P; index n + 1 counts the jet variable Qn.

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _trim(exps: list) -> tuple:
    while exps and exps[-1] == 0:
        exps.pop()
    return tuple(exps)


def _mono_mul(a: tuple, b: tuple) -> tuple:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]
    if out and out[0] >= 2:
        q, r = divmod(out[0], 2)
        out[0] = r
        if len(out) < 2:
            out.append(0)
        out[1] += q
    return _trim(out)


def _mono_text(mono: tuple) -> str:
    parts = []
    for i, e in enumerate(mono):
        if e == 0:
            continue
        name = "P" if i == 0 else f"Q{i - 1}"
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def _mono_sort_key(mono: tuple) -> tuple:
    return (sum(mono), mono)


# -- polynomials (dict monomial -> Fraction) ----------------------------------


def _poly_add(target: dict, poly: dict, scale: Fraction = _ONE) -> None:
    for mono, c in poly.items():
        new = target.get(mono, _ZERO) + c * scale
        if new:
            target[mono] = new
        else:
            target.pop(mono, None)


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            mono = _mono_mul(ma, mb)
            new = out.get(mono, _ZERO) + ca * cb
            if new:
                out[mono] = new
            else:
                out.pop(mono, None)
    return out


# -- the public expression type -----------------------------------------------


class JetExpression:
    """Canonical rational expression in the jet variables and the radical P.

    Instances are immutable and support ``+``, ``-``, ``*`` with each other
    and with integers or :class:`~fractions.Fraction`; division is restricted
    to divisors whose numerator is a single monomial (the only case the
    recurrences need, and the only case that keeps denominators monomial).

    Build expressions from the atoms :meth:`constant`, :meth:`radical` (P)
    and :meth:`variable` (Qn).
    """

    __slots__ = ("_num", "_den")

    def __init__(self, num: dict, den: tuple, den_coeff: Fraction = _ONE):
        num = {m: c for m, c in num.items() if c}
        if not num:
            object.__setattr__(self, "_num", {})
            object.__setattr__(self, "_den", ())
            return
        # Rationalize: move any radical out of the denominator.
        if den and den[0]:
            p_mono = (1,)
            num = {_mono_mul(m, p_mono): c for m, c in num.items()}
            den = _mono_mul(den, p_mono)
        # Fold the denominator coefficient into the numerator (monic form).
        if den_coeff != 1:
            num = {m: c / den_coeff for m, c in num.items()}
        # Cancel monomial factors common to the numerator and denominator.
        if den:
            width = len(den)
            common = list(den)
            for mono in num:
                for i in range(width):
                    e = mono[i] if i < len(mono) else 0
                    if e < common[i]:
                        common[i] = e
                if not any(common):
                    break
            if any(common):
                def _strip(mono: tuple) -> tuple:
                    out = list(mono) + [0] * (width - len(mono))
                    for i in range(width):
                        out[i] -= common[i]
                    return _trim(out)

                num = {_strip(m): c for m, c in num.items()}
                den = _strip(den)
        object.__setattr__(self, "_num", num)
        object.__setattr__(self, "_den", den)

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("JetExpression is immutable")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, value) -> "JetExpression":
        c = Fraction(value)
        return cls({(): c} if c else {}, ())

    @classmethod
    def radical(cls) -> "JetExpression":
        """The formal square root P with P^2 = Q0."""
        return cls({(1,): _ONE}, ())

    @classmethod
    def variable(cls, n: int) -> "JetExpression":
        """The jet variable Qn, the n-th derivative of the squared momentum."""
        if n < 0:
            raise ValueError("jet variable index must be >= 0")
        return cls({(0,) + (0,) * n + (1,): _ONE}, ())

    # -- inspection -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._num

    @property
    def max_derivative_order(self) -> int:
        """Highest n such that Qn occurs (-1 for constants and pure P)."""
        top = 0
        for mono in list(self._num) + [self._den]:
            if len(mono) > top:
                top = len(mono)
        return max(top - 2, -1)

    def canonical_text(self) -> str:
        """Deterministic plain-text rendering, for regression snapshots."""
        if not self._num:
            return "0"
        parts = []
        for mono in sorted(self._num, key=_mono_sort_key, reverse=True):
            c = self._num[mono]
            sign = "-" if c < 0 else "+"
            mag = -c if c < 0 else c
            body = _mono_text(mono)
            if mag == 1 and body != "1":
                parts.append((sign, body))
            elif body == "1":
                parts.append((sign, str(mag)))
            else:
                parts.append((sign, f"{mag}*{body}"))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        if self._den:
            text = f"({text}) / ({_mono_text(self._den)})"
        return text

    def __str__(self) -> str:
        return self.canonical_text()

    def __repr__(self) -> str:
        return f"<JetExpression {self.canonical_text()}>"

    # -- identity -------------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, JetExpression)
            and self._den == other._den
            and self._num == other._num
        )

    def __hash__(self):
        return hash((frozenset(self._num.items()), self._den))

    # -- arithmetic -----------------------------------------------------------

    @staticmethod
    def _coerce(value) -> "JetExpression | None":
        if isinstance(value, JetExpression):
            return value
        if isinstance(value, (int, Fraction)):
            return JetExpression.constant(value)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        width = max(len(self._den), len(other._den))
        lcm = tuple(
            max(
                self._den[i] if i < len(self._den) else 0,
                other._den[i] if i < len(other._den) else 0,
            )
            for i in range(width)
        )

        def _lift(num: dict, den: tuple) -> dict:
            extra = _trim([lcm[i] - (den[i] if i < len(den) else 0) for i in range(width)])
            if not extra:
                return dict(num)
            return {_mono_mul(m, extra): c for m, c in num.items()}

        merged = _lift(self._num, self._den)
        _poly_add(merged, _lift(other._num, other._den))
        return JetExpression(merged, _trim(list(lcm)))

    __radd__ = __add__

    def __neg__(self):
        return JetExpression({m: -c for m, c in self._num.items()}, self._den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return JetExpression(
            _poly_mul(self._num, other._num), _mono_mul(self._den, other._den)
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division of a jet expression by zero")
            inv = Fraction(1, 1) / Fraction(other)
            return JetExpression({m: c * inv for m, c in self._num.items()}, self._den)
        if not isinstance(other, JetExpression):
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division of a jet expression by zero")
        if len(other._num) != 1:
            raise ValueError(
                "division is supported only for divisors with a monomial numerator"
            )
        ((mono, coeff),) = other._num.items()
        num = (
            dict(self._num)
            if not other._den
            else {_mono_mul(m, other._den): c for m, c in self._num.items()}
        )
        return JetExpression(num, _mono_mul(self._den, mono), coeff)


# -- jet differentiation ------------------------------------------------------


def _poly_derivative(poly: dict) -> JetExpression:
    """Total z-derivative of a polynomial part, as a JetExpression.

    Differentiating a Qn factor raises it to Qn+1; differentiating the
    radical uses P' = Q1 / (2 P) = Q1 P / (2 Q0), which is what introduces
    the (monomial) denominators of the hierarchy.
    """
    plain: dict = {}
    over_q0: dict = {}
    for mono, c in poly.items():
        for i in range(1, len(mono)):
            a = mono[i]
            if not a:
                continue
            out = list(mono) + [0] * (i + 2 - len(mono))
            out[i] -= 1
            out[i + 1] += 1
            _poly_add(plain, {_trim(out): c * a})
        if mono and mono[0]:
            out = list(mono) + [0] * max(0, 3 - len(mono))
            out[2] += 1  # one more power of Q1; P stays (P^-1 = P / Q0)
            _poly_add(over_q0, {_trim(out): c / 2})
    result = JetExpression(plain, ())
    if over_q0:
        result = result + JetExpression(over_q0, (0, 1))
    return result


def jet_derivative(e: JetExpression) -> JetExpression:
    """Total derivative in z of a jet expression, exactly.

    Applies the chain rule Qn -> Qn+1 and P -> Q1 / (2 P) through the
    quotient rule, returning a canonical expression.
    """
    num_expr = JetExpression(e._num, ())
    den_expr = JetExpression({e._den: _ONE}, ())
    d_num = _poly_derivative(e._num)
    d_den = _poly_derivative({e._den: _ONE})
    return (d_num * den_expr - num_expr * d_den) / (den_expr * den_expr)


# -- term generation ----------------------------------------------------------

_lock = threading.Lock()
_riccati: dict[int, JetExpression] = {}
_sigma: dict[int, JetExpression] = {}
_sigma_d1: dict[int, JetExpression] = {}
_sigma_d2: dict[int, JetExpression] = {}
_sigma_recip: dict[int, JetExpression] = {}


def _check_order(k: int, max_order: int | None) -> None:
    if not isinstance(k, int) or k < 0:
        raise ValueError("term order must be a nonnegative integer")
    cap = MAX_ORDER if max_order is None else max_order
    if k > cap:
        raise ValueError(f"term order {k} exceeds the maximum order {cap}")


def _riccati_unlocked(k: int) -> JetExpression:
    if k in _riccati:
        return _riccati[k]
    if k == 0:
        term = JetExpression.radical()
    else:
        acc = jet_derivative(_riccati_unlocked(k - 1))
        for j in range(1, k):
            acc = acc + _riccati_unlocked(k - j) * _riccati_unlocked(j)
        term = -acc / (2 * JetExpression.radical())
    _riccati[k] = term
    return term


def riccati_term(k: int, *, max_order: int | None = None) -> JetExpression:
    """z-derivative of the order-k term of the log-derivative hierarchy.

    The hierarchy solves the Riccati equation for the logarithmic derivative
    of the wavefunction order by order in hbar; the order-0 term is P and the
    order-1 term is -Q1 / (4 Q0), whose contour integral around the turning
    points is the Maslov contribution i pi.  Terms are memoized.

    Parameters
    ----------
    k : int
        Order in the hbar expansion, k >= 0.
    max_order : int, optional
        Cap on k; defaults to the module-level :data:`MAX_ORDER`.
    """
    _check_order(k, max_order)
    with _lock:
        return _riccati_unlocked(k)


def _sigma_unlocked(k: int) -> JetExpression:
    if k in _sigma:
        return _sigma[k]
    if k == 0:
        term = JetExpression.radical()
    else:
        # Series coefficients of D, D', D'' and 1/D in powers of hbar^2,
        # built from the already generated lower orders.
        for j in range(k):
            if j not in _sigma_d1:
                _sigma_d1[j] = jet_derivative(_sigma_unlocked(j))
                _sigma_d2[j] = jet_derivative(_sigma_d1[j])
            if j not in _sigma_recip:
                if j == 0:
                    _sigma_recip[0] = JetExpression.constant(1) / _sigma_unlocked(0)
                else:
                    acc = JetExpression.constant(0)
                    for i in range(1, j + 1):
                        acc = acc + _sigma_unlocked(i) * _sigma_recip[j - i]
                    _sigma_recip[j] = -(_sigma_recip[0] * acc)
        # Coefficient of hbar^(2 (k - 1)) in D''/D - (3/2) (D'/D)^2.
        second = JetExpression.constant(0)
        for j in range(k):
            second = second + _sigma_d2[j] * _sigma_recip[k - 1 - j]
        logslope = [JetExpression.constant(0)] * k
        for j in range(k):
            acc = JetExpression.constant(0)
            for i in range(j + 1):
                acc = acc + _sigma_d1[i] * _sigma_recip[j - i]
            logslope[j] = acc
        square = JetExpression.constant(0)
        for j in range(k):
            square = square + logslope[j] * logslope[k - 1 - j]
        bracket = second - Fraction(3, 2) * square
        # Coefficient of hbar^(2k) in D^2 + (hbar^2/2) * bracket = Q.
        quad = JetExpression.constant(0)
        for j in range(1, k):
            quad = quad + _sigma_unlocked(j) * _sigma_unlocked(k - j)
        term = -(quad + bracket / 2) / (2 * JetExpression.radical())
    _sigma[k] = term
    return term


def sigma_term(k: int, *, max_order: int | None = None) -> JetExpression:
    """Order-k coefficient of the phase-derivative series in powers of hbar^2.

    The exact phase derivative D satisfies

        D^2 + (hbar^2 / 2) * (D''/D - (3/2) (D'/D)^2) = Q,

    and expanding D = sum_k hbar^(2k) sigma_term(k) and equating powers of
    hbar^2 determines every term algebraically; the order-0 term is P.
    Because only even powers of hbar occur, partial sums of this series are
    real on the classically allowed region, where they approximate the exact
    phase derivative asymptotically.  Terms are memoized.

    Parameters
    ----------
    k : int
        Order in the hbar^2 expansion, k >= 0.
    max_order : int, optional
        Cap on k; defaults to the module-level :data:`MAX_ORDER`.
    """
    _check_order(k, max_order)
    with _lock:
        return _sigma_unlocked(k)


# -- evaluation ---------------------------------------------------------------


class Branch(enum.Enum):
    """Branch of the radical P used when substituting numbers.

    ``PRINCIPAL`` takes the principal square root of Q0.  ``CUT`` places the
    branch cut of P on the real segment between the two turning points, the
    sheet being fixed so that a clockwise contour integral of
    ``riccati_term(0)`` around the cut equals twice the action integral
    between the turning points.
    """

    PRINCIPAL = "principal"
    CUT = "cut_between_turning_points"


@dataclass(frozen=True)
class JetPoint:
    """Jet of the squared momentum at one evaluation point.

    Fields
    ------
    z : complex
        Evaluation point, real or complex.
    values : tuple of complex
        Exact values (Q0, Q1, ..., Qd) of the squared momentum and its
        derivatives at z.
    turning_point : float or None
        Positive turning point of the underlying well, required by the cut
        branch of :func:`evaluate`.
    """

    z: complex
    values: tuple
    turning_point: float | None = None

    @classmethod
    def from_potential(
        cls,
        V: SymmetricPotential,
        E: float,
        z,
        order: int = MAX_ORDER,
        turning_point_value: float | None = None,
    ) -> "JetPoint":
        """Jet of Q(.) = 2 (E - V(.)) at z, through derivative order ``order``.

        Pass ``turning_point_value`` to reuse an already computed positive
        turning point when building many points at the same energy.
        """
        zc = complex(z)
        q0 = 2.0 * (E - complex(V.value(zc)))
        values = (q0,) + tuple(
            -2.0 * complex(V.derivative(zc, n)) for n in range(1, order + 1)
        )
        if turning_point_value is None:
            turning_point_value = turning_point(V, E).t2
        return cls(z=zc, values=values, turning_point=turning_point_value)


def _radical_value(pt: JetPoint, branch: Branch) -> complex:
    q0 = complex(pt.values[0])
    if branch is Branch.PRINCIPAL:
        return cmath.sqrt(q0)
    t2 = pt.turning_point
    if t2 is None:
        raise ValueError("cut-branch evaluation requires a jet point with a turning point")
    z = complex(pt.z)
    denom = t2 * t2 - z * z
    if denom == 0:
        raise PoleAtPoint(f"cut-branch radical evaluated at a turning point z={z}")
    return -1j * cmath.sqrt(z - t2) * cmath.sqrt(z + t2) * cmath.sqrt(q0 / denom)


def evaluate(
    e: JetExpression, pt: JetPoint, branch: Branch | str = Branch.PRINCIPAL
) -> complex:
    """Substitute jet values into an expression, on the requested branch.

    Parameters
    ----------
    e : JetExpression
        Expression to evaluate.
    pt : JetPoint
        Jet values; must carry at least as many derivatives as ``e`` uses.
    branch : Branch or str
        How to evaluate the radical P.  The principal branch is the principal
        square root of Q0; the cut branch puts the branch cut of P on the real
        segment between the turning points, as contour quadrature requires.

    Raises
    ------
    PoleAtPoint
        If the denominator vanishes at the point, which signals evaluation
        at (or numerically too near) a turning point, or if the substituted
        value overflows.
    """
    branch = Branch(branch)
    needed = e.max_derivative_order
    if needed >= len(pt.values):
        raise ValueError(
            f"expression uses Q{needed} but the jet point carries only "
            f"{len(pt.values)} values"
        )
    if e.is_zero:
        return 0.0 + 0.0j
    values = tuple(complex(v) for v in pt.values)

    def _mono_value(mono: tuple) -> complex:
        out = 1.0 + 0.0j
        for i, exp in enumerate(mono):
            if not exp:
                continue
            base = p_value if i == 0 else values[i - 1]
            out *= base**exp
        return out

    p_value = _radical_value(pt, branch) if any(m and m[0] for m in e._num) else 0.0j
    num = 0.0 + 0.0j
    for mono, coeff in e._num.items():
        num += float(coeff) * _mono_value(mono)
    den = _mono_value(e._den)
    if den == 0:
        raise PoleAtPoint(f"denominator vanishes at z={pt.z}")
    result = num / den
    if not cmath.isfinite(result):
        raise PoleAtPoint(f"evaluation overflowed at z={pt.z}")
    return result


def _evaluate_array(
    e: JetExpression,
    z: np.ndarray,
    jets: list,
    turning_point_value: float,
    branch: Branch,
) -> np.ndarray:
    """Vectorized :func:`evaluate` over arrays of points sharing one energy.

    ``jets[n]`` is the array of Qn values over the points ``z``.  Used by the
    contour quadrature, where per-point scalar evaluation would dominate the
    run time.  Poles are not screened here; callers keep their nodes away
    from the turning points by construction.
    """
    z = np.asarray(z, dtype=complex)
    if branch is Branch.PRINCIPAL:
        p = np.sqrt(np.asarray(jets[0], dtype=complex))
    else:
        t2 = turning_point_value
        p = (
            -1j
            * np.sqrt(z - t2)
            * np.sqrt(z + t2)
            * np.sqrt(np.asarray(jets[0], dtype=complex) / (t2 * t2 - z * z))
        )

    def _mono_value(mono: tuple) -> np.ndarray:
        out = np.ones_like(z)
        for i, exp in enumerate(mono):
            if not exp:
                continue
            base = p if i == 0 else jets[i - 1]
            out = out * base**exp
        return out

    num = np.zeros_like(z)
    for mono, coeff in e._num.items():
        num = num + float(coeff) * _mono_value(mono)
    return num / _mono_value(e._den)
