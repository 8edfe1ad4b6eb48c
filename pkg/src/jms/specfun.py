"""Double-precision special functions used by the coefficient tables.

Everything here is a pure function of its arguments.  The operating range
is modest (|z| up to a few hundred), so plain series and recurrences with
a couple of standard safeguards are enough:

* gamma ratios are evaluated in the log domain (``log_gamma``) so that
  normalization constants stay finite for large indices,
* the confluent hypergeometric series is accumulated with compensated
  (Kahan) summation, and arguments with negative real part are mapped to
  positive ones through the reflection 1F1(a;c;z) = e^z 1F1(c-a;c;-z),
  which removes the catastrophic cancellation of the alternating series,
* spherical Bessel values use upward recurrence where it is stable
  (x >= ell) and Miller-style downward recurrence otherwise.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SeriesControl",
    "NonConvergenceError",
    "log_gamma",
    "laguerre_sequence",
    "kummer_1f1",
    "spherical_bessel_j",
]


class NonConvergenceError(RuntimeError):
    """A series did not meet its tolerance within the allowed terms."""


@dataclass(frozen=True)
class SeriesControl:
    """Stopping rule for series summation.

    The sum terminates once the running term stays below
    ``rel_tol * |partial sum|`` for three consecutive terms, and fails
    with :class:`NonConvergenceError` after ``max_terms`` terms.
    """

    rel_tol: float = 1e-15
    max_terms: int = 10000

    def __post_init__(self) -> None:
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


def log_gamma(z: float) -> float:
    """Natural log of the gamma function for positive real argument.

    Relative accuracy is a few ulp over z in [0.5, 1e6] (delegated to the
    C library implementation, which is exact at the integer zeros).
    """
    if z <= 0.0:
        raise ValueError(f"log_gamma requires z > 0, got {z}")
    return math.lgamma(z)


def laguerre_sequence(alpha: float, x: complex, n_max: int) -> np.ndarray:
    """Generalized Laguerre values L_0^alpha(x) .. L_{n_max}^alpha(x).

    Uses the standard three-term recurrence

        (n+1) L_{n+1} = (2n + alpha + 1 - x) L_n - (n + alpha) L_{n-1},

    which is forward-stable in the oscillatory regime and for x <= 0.
    The result is a complex array; for real x the imaginary parts are
    exactly zero.
    """
    if alpha <= -1.0:
        raise ValueError(f"laguerre_sequence requires alpha > -1, got {alpha}")
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    x = complex(x)
    out = np.empty(n_max + 1, dtype=complex)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 1.0 + alpha - x
    for n in range(1, n_max):
        out[n + 1] = ((2.0 * n + alpha + 1.0 - x) * out[n]
                      - (n + alpha) * out[n - 1]) / (n + 1.0)
    return out


def _kummer_series(a: float, c: float, z: complex, ctl: SeriesControl) -> complex:
    """Raw power series sum_k (a)_k/(c)_k z^k/k! with Kahan accumulation."""
    total = complex(1.0)
    comp = complex(0.0)          # running compensation
    term = complex(1.0)
    quiet = 0
    for k in range(1, ctl.max_terms + 1):
        term *= (a + k - 1.0) / (c + k - 1.0) * z / k
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < ctl.rel_tol * abs(total):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
    raise NonConvergenceError(
        f"1F1({a}; {c}; {z}) did not converge within {ctl.max_terms} terms")


def kummer_1f1(a: float, c: float, z: complex,
               ctl: SeriesControl = SeriesControl()) -> complex:
    """Confluent hypergeometric function 1F1(a; c; z).

    ``c`` must not be zero or a negative integer (those are poles of the
    series).  For Re(z) < 0 the reflection 1F1(a;c;z) = e^z 1F1(c-a;c;-z)
    is applied first: the reflected series has terms of essentially one
    sign, so the alternating-series cancellation that would otherwise eat
    ~0.4*|z| digits never arises.
    """
    if c <= 0.0 and c == math.floor(c):
        raise ValueError(f"1F1 pole: c = {c} is zero or a negative integer")
    z = complex(z)
    if z == 0:
        return complex(1.0)
    if z.real < 0.0:
        return cmath.exp(z) * _kummer_series(c - a, c, -z, ctl)
    return _kummer_series(a, c, z, ctl)


def spherical_bessel_j(ell: int, x: float) -> float:
    """Spherical Bessel function j_ell(x) for x > 0.

    Upward recurrence from j_0, j_1 when x >= ell; Miller downward
    recurrence normalized against j_0 = sin(x)/x otherwise.
    """
    if x <= 0.0:
        raise ValueError(f"spherical_bessel_j requires x > 0, got {x}")
    if ell < 0:
        raise ValueError(f"ell must be nonnegative, got {ell}")
    j0 = math.sin(x) / x
    if ell == 0:
        return j0
    if x >= ell:
        jm, jc = j0, j0 / x - math.cos(x) / x
        for n in range(1, ell):
            jm, jc = jc, (2.0 * n + 1.0) / x * jc - jm
        return jc
    # downward: start well above ell with an arbitrary tiny seed
    n_start = ell + 24
    jp = 0.0
    jc = 1e-280
    val = 0.0
    for n in range(n_start, 0, -1):
        jn = (2.0 * n + 1.0) / x * jc - jp
        jp, jc = jc, jn
        if n - 1 == ell:
            val = jc
        if abs(jc) > 1e200:          # rescale to dodge overflow
            jp /= 1e200
            jc /= 1e200
            val /= 1e200
    # jc now holds the unnormalized j_0
    return val * (j0 / jc)
