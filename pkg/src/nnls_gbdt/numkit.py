"""Dense complex linear algebra for small matrices.

All routines operate on plain ``complex128`` numpy arrays and are sized for
the matrix orders this package actually meets (n <= 16, blocks <= 4). The
matrix exponential uses scaling-and-squaring with a degree-13 rational
kernel; the Sylvester solver uses the dense Kronecker linearization, chosen
for exactness of the residual contract over a Schur factorization.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

from .errors import (
    InvalidRange,
    NoConvergence,
    NonSquare,
    Overflow,
    SpectralClash,
)

# e^M entries can leave double range beyond this 1-norm; accuracy is
# guaranteed (backward error <= 1e-12) for norms up to 50.
EXPM_NORM_LIMIT = 700.0

# Relative spectral-gap threshold below which the Sylvester map is treated
# as numerically singular.
SPECTRAL_CLASH_FACTOR = 1e-8


def as_cmatrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex128 array.

    Raises ``ValueError`` if the input is not 2-D or contains non-finite
    entries.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _square(m, name: str) -> np.ndarray:
    a = as_cmatrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {a.shape}")
    return a


def expm(m) -> np.ndarray:
    """Matrix exponential ``e^m``.

    Parameters
    ----------
    m
        Square complex matrix.

    Returns
    -------
    numpy.ndarray
        ``e^m``, exact up to rounding on diagonal and nilpotent inputs;
        relative backward error at most 1e-12 for ``||m||_1 <= 50``.

    Raises
    ------
    NonSquare
        If ``m`` is not square.
    Overflow
        If ``||m||_1`` exceeds the documented operating range (700), where
        entries of the result can leave double range.
    """
    a = _square(m, "expm operand")
    if a.shape[0] == 0:
        return a.copy()
    norm1 = np.linalg.norm(a, 1)
    if norm1 > EXPM_NORM_LIMIT:
        raise Overflow(f"||m||_1 = {norm1:.3e} exceeds expm operating range {EXPM_NORM_LIMIT:g}")
    return scipy.linalg.expm(a)


def spectral_margin(a, b) -> float:
    """Smallest ``|lambda_i(a) + mu_j(b)|`` over all eigenvalue pairs."""
    a = _square(a, "a")
    b = _square(b, "b")
    la = eigenvalues(a)
    lb = eigenvalues(b)
    return float(np.min(np.abs(la[:, None] + lb[None, :])))


def _sylvester_operator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # vec is column-stacking: vec(aX) = (I (x) a) vec(X), vec(Xb) = (b^T (x) I) vec(X)
    n = a.shape[0]
    eye = np.eye(n)
    return np.kron(eye, a) + np.kron(b.T, eye)


def sylvester_solver(a, b) -> Callable[[np.ndarray], np.ndarray]:
    """Factor the map X -> a X + X b once and return a solver for many C.

    The returned callable accepts a stack of right-hand sides with shape
    ``(..., n, n)`` and returns solutions of the same shape. Raises
    SpectralClash if the spectra of ``a`` and ``-b`` are not numerically
    disjoint (margin below 1e-8 * (||a|| + ||b||)).
    """
    a = _square(a, "a")
    b = _square(b, "b")
    n = a.shape[0]
    if b.shape[0] != n:
        raise NonSquare(f"a and b must have equal orders, got {a.shape} and {b.shape}")
    margin = spectral_margin(a, b)
    scale = np.linalg.norm(a) + np.linalg.norm(b)
    if margin < SPECTRAL_CLASH_FACTOR * scale:
        raise SpectralClash(
            f"spectral margin {margin:.3e} below threshold "
            f"{SPECTRAL_CLASH_FACTOR * scale:.3e}; spectra of a and -b overlap"
        )
    lu, piv = scipy.linalg.lu_factor(_sylvester_operator(a, b))

    def solve_many(c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=np.complex128)
        lead = c.shape[:-2]
        if c.shape[-2:] != (n, n):
            raise NonSquare(f"right-hand side blocks must be {n}x{n}, got {c.shape[-2:]}")
        # column-stacked vec of each block, blocks along the last axis
        flat = c.reshape(-1, n, n).transpose(0, 2, 1).reshape(-1, n * n).T
        sol = scipy.linalg.lu_solve((lu, piv), flat)
        out = sol.T.reshape(-1, n, n).transpose(0, 2, 1)
        return out.reshape(*lead, n, n)

    return solve_many


def solve_sylvester(a, b, c) -> np.ndarray:
    """Solve ``a X + X b = c`` for square complex matrices of equal order.

    Uses the dense Kronecker linearization (n^2 unknowns). The residual
    satisfies ``||aX + Xb - c|| <= 1e-11 (||a|| ||X|| + ||X|| ||b|| + ||c||)``
    away from the clash threshold, and X is Hermitian whenever ``b = a*``
    and ``c = c*``.

    Raises
    ------
    SpectralClash
        If ``min |lambda_i(a) + mu_j(b)|`` is below
        ``1e-8 * (||a|| + ||b||)``.
    NonSquare
        On non-square or mismatched operands.
    """
    c = _square(c, "c")
    solver = sylvester_solver(a, b)
    return solver(c)


def eigenvalues(m) -> np.ndarray:
    """Eigenvalues of a square complex matrix, multiplicities included.

    Backed by the implicitly-shifted QR iteration; each returned value
    satisfies ``||m v - lambda v|| <= 1e-10 ||m||`` for some unit vector v.
    Raises NoConvergence if the iteration fails.
    """
    a = _square(m, "eigenvalues operand")
    if a.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigenvalue iteration failed: {exc}") from exc


def integrate_matrix(f: Callable[[float], np.ndarray], lo: float, hi: float, steps: int) -> np.ndarray:
    """Composite-Simpson integral of a matrix-valued function over [lo, hi].

    Parameters
    ----------
    f
        Maps a real number to a matrix; all values must share one shape.
    lo, hi
        Finite bounds. ``hi < lo`` integrates with orientation (the result
        is the signed integral).
    steps
        Positive panel count; rounded up to the next even integer. The
        error decays like ``steps**-4`` for smooth integrands.

    Raises
    ------
    InvalidRange
        On non-finite bounds or a non-positive step count.
    """
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise InvalidRange(f"bounds must be finite, got [{lo!r}, {hi!r}]")
    if steps < 1:
        raise InvalidRange(f"steps must be positive, got {steps}")
    n = int(steps)
    n += n % 2
    first = as_cmatrix(f(float(lo)), "integrand value")
    if hi == lo:
        return np.zeros_like(first)
    h = (hi - lo) / n
    samples = np.empty((n + 1,) + first.shape, dtype=np.complex128)
    samples[0] = first
    for k in range(1, n + 1):
        v = as_cmatrix(f(float(lo + k * h)), "integrand value")
        if v.shape != first.shape:
            raise InvalidRange(f"integrand changed shape from {first.shape} to {v.shape}")
        samples[k] = v
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return (h / 3.0) * np.tensordot(w, samples, axes=1)
