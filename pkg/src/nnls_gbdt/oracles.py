"""Closed-form reference solutions evaluated independently of the solver.

Each family below is an explicit formula for a small transformation datum:
a single eigenvalue with scalar columns, a 2x2 Jordan block, and a single
eigenvalue with a wide first column block.  The formulas are written out in
scalar arithmetic on purpose, with no matrix exponentials, no Sylvester
solves, and no shared helpers, so that agreement with the solver pipeline
is evidence rather than tautology.

Conventions shared by all three families: ``kappa`` is 0 in the defocusing
case (sigma = +1) and 1 in the focusing case (sigma = -1), and the
eigenvalue ``a`` must satisfy a + conj(a) != 0.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParams, SingularPoint

# Relative threshold under which a closed-form denominator counts as zero.
DENOMINATOR_FLOOR = 1e-12


def _check_kappa(kappa: int) -> None:
    if kappa not in (0, 1):
        raise InvalidParams(f"kappa must be 0 or 1, got {kappa!r}")


def _check_eigenvalue(a: complex) -> None:
    if a + a.conjugate() == 0:
        raise InvalidParams(f"eigenvalue a={a!r} has a + conj(a) = 0")


@dataclass(frozen=True)
class Example1Params:
    """Scalar datum: eigenvalue ``a`` and nonzero columns ``theta1, theta2``."""

    a: complex
    theta1: complex
    theta2: complex
    kappa: int

    def __post_init__(self) -> None:
        _check_kappa(self.kappa)
        for name in ("a", "theta1", "theta2"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        _check_eigenvalue(self.a)
        if self.theta1 == 0 or self.theta2 == 0:
            raise InvalidParams("theta1 and theta2 must both be nonzero")


@dataclass(frozen=True)
class Example2Params:
    """Jordan-block datum: A = a*I + N with N the 2x2 nilpotent shift.

    The columns are (0, b)^T and (0, c)^T.  Either of ``b, c`` may vanish
    on its own; both at once would make every denominator identically zero.
    """

    a: complex
    b: complex
    c: complex
    kappa: int

    def __post_init__(self) -> None:
        _check_kappa(self.kappa)
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        _check_eigenvalue(self.a)
        if self.b == 0 and self.c == 0:
            raise InvalidParams("b and c cannot both be zero")


@dataclass(frozen=True)
class Example3Params:
    """Rectangular datum: scalar eigenvalue with a 1x2 block (b1, b2) and c."""

    a: complex
    b1: complex
    b2: complex
    c: complex
    kappa: int

    def __post_init__(self) -> None:
        _check_kappa(self.kappa)
        for name in ("a", "b1", "b2", "c"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        _check_eigenvalue(self.a)
        if self.b1 == 0 and self.b2 == 0 and self.c == 0:
            raise InvalidParams("b1, b2 and c cannot all be zero")


def _phase(a: complex, x: float, t: float) -> complex:
    """Exponent phi with e^{i phi} carrying the x and t dependence of S."""
    return (a + a.conjugate()) * x - 2.0 * (a * a - a.conjugate() ** 2) * t


def ex1_S(p: Example1Params, x: float, t: float) -> complex:
    """Closed form of the 1x1 identity solution S(x, t)."""
    a = complex(p.a)
    two_re = a + a.conjugate()
    phi = _phase(a, x, t)
    sgn = -1.0 if p.kappa == 1 else 1.0
    return (
        cmath.exp(1j * phi) * abs(p.theta1) ** 2
        + sgn * cmath.exp(-1j * phi) * abs(p.theta2) ** 2
    ) / two_re


def ex1_u(p: Example1Params, x: float, t: float) -> complex:
    """Closed form of the constructed solution for the scalar datum.

    Raises SingularPoint when the evaluation point sits on the singular
    set of S, detected through the rescaled denominator.
    """
    a = complex(p.a)
    two_re = a + a.conjugate()
    phi = _phase(a, x, t)
    sgn = -1.0 if p.kappa == 1 else 1.0
    modulus = abs(p.theta1) ** 2 + abs(cmath.exp(-2j * phi)) * abs(p.theta2) ** 2
    denom = abs(p.theta1) ** 2 + sgn * cmath.exp(-2j * phi) * abs(p.theta2) ** 2
    if abs(denom) <= DENOMINATOR_FLOOR * modulus:
        raise SingularPoint(x, t, abs(ex1_S(p, x, t)))
    numer = (
        -2j
        * two_re
        * cmath.exp(-2j * a * (x - 2.0 * a * t))
        * p.theta1.conjugate()
        * p.theta2
    )
    return numer / denom


def ex1_blowup_time(p: Example1Params) -> Optional[float]:
    """First-kind blow-up instant for the scalar datum, if one exists.

    The singular set is nonempty exactly when the moduli of the two
    exponential terms in S can balance; that happens at the single time
    returned here, for either kappa, and at no time when a^2 is real.
    """
    a = complex(p.a)
    im_a2 = (a * a).imag
    if im_a2 == 0.0:
        return None
    ratio = abs(p.theta1) ** 2 / abs(p.theta2) ** 2
    return float(np.log(ratio) / (-8.0 * im_a2))


def _ex2_pieces(p: Example2Params, x: float, t: float):
    """Shared exponent, weights and denominator of the Jordan-block forms."""
    a = complex(p.a)
    two_re = a + a.conjugate()
    sgn = -1.0 if p.kappa == 1 else 1.0
    big_p = 1j * (two_re * x + 2.0 * (a.conjugate() ** 2 - a * a) * t)
    eb = abs(p.b) ** 2 * cmath.exp(big_p)
    ec = abs(p.c) ** 2 * cmath.exp(-big_p)
    poly = (
        4.0
        * abs(p.b * p.c) ** 2
        * two_re**2
        * (x - 4.0 * a * t)
        * (x + 4.0 * a.conjugate() * t)
    )
    denom = (
        abs(p.b) ** 4 * cmath.exp(2.0 * big_p)
        + abs(p.c) ** 4 * cmath.exp(-2.0 * big_p)
        + 2.0 * sgn * abs(p.b * p.c) ** 2
        - sgn * poly
    )
    modulus = (
        abs(p.b) ** 4 * abs(cmath.exp(2.0 * big_p))
        + abs(p.c) ** 4 * abs(cmath.exp(-2.0 * big_p))
        + 2.0 * abs(p.b * p.c) ** 2
        + abs(poly)
    )
    return a, two_re, sgn, big_p, eb, ec, denom, modulus


def ex2_detS(p: Example2Params, x: float, t: float) -> complex:
    """Determinant of S for the Jordan-block datum."""
    _, two_re, _, _, _, _, denom, _ = _ex2_pieces(p, x, t)
    return denom / two_re**4


def ex2_u(p: Example2Params, x: float, t: float) -> complex:
    """Constructed solution for the Jordan-block datum."""
    a, two_re, sgn, _, eb, ec, denom, modulus = _ex2_pieces(p, x, t)
    if abs(denom) <= DENOMINATOR_FLOOR * modulus:
        raise SingularPoint(x, t, abs(denom) / abs(two_re) ** 4)
    phase = cmath.exp(
        1j * ((a.conjugate() - a) * x + 2.0 * (a * a + a.conjugate() ** 2) * t)
    )
    bracket = eb * (
        8j * a * two_re * t - 2j * two_re * x + 2.0
    ) + sgn * ec * (8j * a.conjugate() * two_re * t + 2j * two_re * x + 2.0)
    return -2j * p.b.conjugate() * p.c * two_re * phase * bracket / denom


def ex3_u(p: Example3Params, x: float, t: float) -> np.ndarray:
    """Constructed 2x1 solution for the rectangular datum."""
    a = complex(p.a)
    two_re = a + a.conjugate()
    phi = _phase(a, x, t)
    sgn = -1.0 if p.kappa == 1 else 1.0
    width = abs(p.b1) ** 2 + abs(p.b2) ** 2
    modulus = width + abs(cmath.exp(-2j * phi)) * abs(p.c) ** 2
    denom = width + sgn * cmath.exp(-2j * phi) * abs(p.c) ** 2
    if abs(denom) <= DENOMINATOR_FLOOR * modulus:
        det_abs = abs(cmath.exp(1j * phi) * denom / two_re)
        raise SingularPoint(x, t, det_abs)
    front = -2j * p.c * two_re * cmath.exp(-2j * a * (x - 2.0 * a * t)) / denom
    return np.array(
        [[front * p.b1.conjugate()], [front * p.b2.conjugate()]],
        dtype=np.complex128,
    )
