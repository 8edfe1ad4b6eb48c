"""Free-particle coefficient tables in a Gaussian-weighted Laguerre basis.

The radial basis is

    phi_n(r) = a_n (lam*r)^{ell+1} exp(-(lam*r)^2/2) L_n^{ell+1/2}((lam*r)^2),
    a_n      = sqrt(2 Gamma(n+1) / Gamma(n+ell+3/2)),

and everything else lives in coefficient space.  Two independent
coefficient families are built at a spectral point x = mu^2 (mu = k/lam):

* sine-like      s_n = sqrt(pi/2) (-1)^n a_n mu^{ell+1} e^{-x/2} L_n^{ell+1/2}(x)
* cosine-like    c_n = (-1)^n/sqrt(pi) Gamma(ell+1/2) a_n mu^{-ell} e^{-x/2}
                        1F1(-n-ell-1/2; 1/2-ell; x)

Both satisfy the symmetric three-term recursion

    x g_n = (2n+ell+3/2) g_n + sqrt(n(n+ell+1/2)) g_{n-1}
                             + sqrt((n+1)(n+ell+3/2)) g_{n+1},   n >= 1,

with initial relations
    x s_0 = (ell+3/2) s_0 + sqrt(ell+3/2) s_1,
    x c_0 = (ell+3/2) c_0 + sqrt(ell+3/2) c_1 - sqrt(2) mu / s_0.

The recursion matrix has bands J_diag[n] = (2n+ell+3/2) - x and
J_sub[n] = sqrt(n(n+ell+1/2)); the combinations p+- = c +- i s carry the
outgoing/incoming wave content.

Negative energies reuse the same code through mu = i*sqrt(-x) (principal
square root, Im mu >= 0).  The tables depend on (ell, x) only: the length
scale lam never enters coefficient space, it only converts r and E.

Note on the cosine normalization: summed against the basis, the printed
c_n tend to sqrt(2)*cos(kr - pi*ell/2) at large r, a factor sqrt(2) above
a unit-amplitude cosine.  The normalization is kept as is because the
initial relation above (which pins every downstream observable) holds for
it exactly; see free_wave_reconstruct for the measurable consequence.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .specfun import (NonConvergenceError, SeriesControl, kummer_1f1,
                      laguerre_sequence, log_gamma)

__all__ = [
    "Channel",
    "SpectralPoint",
    "KinematicTable",
    "normalization",
    "sine_coeffs",
    "sine_coeffs_recursive",
    "cosine_coeffs",
    "cosine_coeffs_direct",
    "jmatrix_bands",
    "build_table",
    "coefficient_grid",
    "tn_rn",
    "free_wave_reconstruct",
    "energy_ode_residual",
]

# exp(-|x|/2) must stay inside double range on the continued branch
_X_OVERFLOW = 1400.0


@dataclass(frozen=True)
class Channel:
    """Kinematic context: angular momentum, length scale, energy convention.

    ``eta`` maps the spectral variable to energy via E = eta * lam^2 * x.
    The shipped default eta = 1/2 (hbar = m = 1) is the convention pinned
    by the resonance calibration run in the acceptance suite.
    """

    ell: int = 0
    lam: float = 1.0
    eta: float = 0.5

    def __post_init__(self) -> None:
        if self.ell < 0 or self.ell != int(self.ell):
            raise ValueError(f"ell must be a nonnegative integer, got {self.ell}")
        if not self.lam > 0.0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.eta not in (0.5, 1.0):
            raise ValueError(f"eta must be 0.5 or 1.0, got {self.eta}")

    def x_from_energy(self, energy: float) -> float:
        return energy / (self.eta * self.lam**2)

    def energy_over_lambda2(self, x: float) -> float:
        return self.eta * x


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral point x = mu^2 with the principal root mu (Im mu >= 0)."""

    x: float
    mu: complex

    @classmethod
    def from_x(cls, x: float) -> "SpectralPoint":
        mu = cmath.sqrt(complex(x))
        if mu.imag < 0.0:       # principal root already has Im >= 0; belt and braces
            mu = -mu
        return cls(x=float(x), mu=mu)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@lru_cache(maxsize=128)
def _norm_array(ell: int, n_max: int) -> np.ndarray:
    """a_n for n = 0..n_max, computed in the log domain."""
    lg = np.array([0.5 * (math.log(2.0) + log_gamma(n + 1.0) - log_gamma(n + ell + 1.5))
                   for n in range(n_max + 1)])
    return _freeze(np.exp(lg))


def normalization(channel: Channel, n: int) -> float:
    """Basis normalization a_n = sqrt(2 Gamma(n+1)/Gamma(n+ell+3/2))."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    return float(_norm_array(channel.ell, n)[n])


def _check_point(point: SpectralPoint, need_nonzero: bool = True) -> None:
    if need_nonzero and point.x == 0.0:
        raise ValueError("spectral point x = 0 is singular for the coefficient tables")
    if abs(point.x) > _X_OVERFLOW:
        raise OverflowError(
            f"|x| = {abs(point.x)} exceeds {_X_OVERFLOW}; exp(|x|/2) overflows")


def sine_coeffs(channel: Channel, point: SpectralPoint, n_max: int) -> np.ndarray:
    """Sine-like coefficients s_0..s_{n_max} by the direct formula.

    For x > 0 the values are exactly real (zero imaginary part); for
    x < 0 they carry the pure prefactor i^{ell+1}.
    """
    _check_point(point)
    ell = channel.ell
    a = _norm_array(ell, n_max)
    lag = laguerre_sequence(ell + 0.5, complex(point.x), n_max)
    sign = np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0)
    pref = math.sqrt(math.pi / 2.0) * point.mu ** (ell + 1) * math.exp(-point.x / 2.0)
    return _freeze(pref * sign * a * lag)


def sine_coeffs_recursive(channel: Channel, point: SpectralPoint, n_max: int) -> np.ndarray:
    """Sine-like coefficients from s_0 plus the recursion (cross-check path).

    s_1 comes from the initial relation x s_0 = (ell+3/2) s_0 + sqrt(ell+3/2) s_1,
    the rest from forward recursion.
    """
    _check_point(point)
    ell = channel.ell
    s = np.empty(n_max + 1, dtype=complex)
    s[0] = sine_coeffs(channel, point, 0)[0]
    if n_max >= 1:
        s[1] = (point.x - (ell + 1.5)) * s[0] / math.sqrt(ell + 1.5)
    for n in range(1, n_max):
        s[n + 1] = ((point.x - (2.0 * n + ell + 1.5)) * s[n]
                    - math.sqrt(n * (n + ell + 0.5)) * s[n - 1]) \
            / math.sqrt((n + 1.0) * (n + ell + 1.5))
    return _freeze(s)


def _cosine_seed(channel: Channel, point: SpectralPoint, n: int,
                 ctl: SeriesControl) -> complex:
    ell = channel.ell
    a_n = normalization(channel, n)
    f = kummer_1f1(-n - ell - 0.5, 0.5 - ell, complex(point.x), ctl)
    pref = ((-1.0) ** n / math.sqrt(math.pi) * math.exp(log_gamma(ell + 0.5))
            * a_n * math.exp(-point.x / 2.0))
    return pref * point.mu ** (-ell) * f


def cosine_coeffs(channel: Channel, point: SpectralPoint, n_max: int,
                  ctl: SeriesControl = SeriesControl()) -> np.ndarray:
    """Cosine-like coefficients, seeded at n = 0, 1 and recursed forward.

    The cosine-like family is the dominant solution of the recursion, so
    forward recursion from the two hypergeometric seeds is stable;
    cosine_coeffs_direct keeps the all-series evaluation as a cross-check.
    """
    _check_point(point)
    ell = channel.ell
    c = np.empty(n_max + 1, dtype=complex)
    c[0] = _cosine_seed(channel, point, 0, ctl)
    if n_max >= 1:
        c[1] = _cosine_seed(channel, point, 1, ctl)
    for n in range(1, n_max):
        c[n + 1] = ((point.x - (2.0 * n + ell + 1.5)) * c[n]
                    - math.sqrt(n * (n + ell + 0.5)) * c[n - 1]) \
            / math.sqrt((n + 1.0) * (n + ell + 1.5))
    return _freeze(c)


def cosine_coeffs_direct(channel: Channel, point: SpectralPoint, n_max: int,
                         ctl: SeriesControl = SeriesControl()) -> np.ndarray:
    """Cosine-like coefficients with every order from its own series."""
    _check_point(point)
    return _freeze(np.array(
        [_cosine_seed(channel, point, n, ctl) for n in range(n_max + 1)]))


def jmatrix_bands(channel: Channel, point: SpectralPoint, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and subdiagonal of the recursion matrix.

    J_diag[n] = (2n + ell + 3/2) - x and J_sub[n] = sqrt(n(n + ell + 1/2));
    J_sub[0] is zero and unused (there is no n = -1 term).
    """
    ell = channel.ell
    n = np.arange(n_max + 1, dtype=float)
    j_diag = 2.0 * n + ell + 1.5 - point.x
    j_sub = np.sqrt(n * (n + ell + 0.5))
    return _freeze(j_diag), _freeze(j_sub)


@dataclass(frozen=True)
class KinematicTable:
    """Coefficient arrays s, c, p+- and recursion bands at one spectral point.

    Immutable after construction; tables for different points can be built
    and used concurrently.
    """

    channel: Channel
    point: SpectralPoint
    n_max: int
    s: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    p_plus: np.ndarray = field(repr=False)
    p_minus: np.ndarray = field(repr=False)
    J_diag: np.ndarray = field(repr=False)
    J_sub: np.ndarray = field(repr=False)

    @property
    def source_term(self) -> complex:
        """The inhomogeneity sqrt(2) mu / s_0 of the initial relation."""
        return math.sqrt(2.0) * self.point.mu / self.s[0]


def build_table(channel: Channel, point: SpectralPoint, n_max: int) -> KinematicTable:
    """Assemble the full kinematic table at one spectral point."""
    s = sine_coeffs(channel, point, n_max)
    c = cosine_coeffs(channel, point, n_max)
    j_diag, j_sub = jmatrix_bands(channel, point, n_max)
    return KinematicTable(channel=channel, point=point, n_max=n_max,
                          s=s, c=c,
                          p_plus=_freeze(c + 1j * s), p_minus=_freeze(c - 1j * s),
                          J_diag=j_diag, J_sub=j_sub)


def coefficient_grid(ell: int, x_values: np.ndarray, n_max: int,
                     rel_tol: float = 1e-15,
                     max_terms: int = 20000) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (s, c) coefficient columns over a grid of real x.

    Returns complex arrays of shape (n_max+1, len(x_values)).  Matches the
    per-point builders to rounding; exists because spectral scans evaluate
    thousands of points and the hypergeometric seeds dominate the cost.
    """
    xs = np.asarray(x_values, dtype=float)
    if np.any(xs == 0.0):
        raise ValueError("coefficient grid contains the singular point x = 0")
    if np.any(np.abs(xs) > _X_OVERFLOW):
        raise OverflowError(f"grid contains |x| > {_X_OVERFLOW}")
    m = len(xs)
    mu = np.sqrt(xs.astype(complex))
    mu = np.where(mu.imag < 0.0, -mu, mu)
    a = _norm_array(ell, n_max)
    alpha = ell + 0.5

    lag = np.empty((n_max + 1, m), dtype=complex)
    lag[0] = 1.0
    if n_max >= 1:
        lag[1] = 1.0 + alpha - xs
    for n in range(1, n_max):
        lag[n + 1] = ((2.0 * n + alpha + 1.0 - xs) * lag[n]
                      - (n + alpha) * lag[n - 1]) / (n + 1.0)
    sign = np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0)
    s = (math.sqrt(math.pi / 2.0) * sign[:, None] * a[:, None]
         * mu[None, :] ** (ell + 1) * np.exp(-xs[None, :] / 2.0) * lag)

    # hypergeometric seeds, vectorized with the same reflection rule
    seeds = np.empty((2, m), dtype=complex)
    for n in range(min(2, n_max + 1)):
        a1, c1 = -n - ell - 0.5, 0.5 - ell
        out = np.empty(m, dtype=complex)
        for neg in (False, True):
            mask = (xs < 0.0) if neg else (xs >= 0.0)
            if not np.any(mask):
                continue
            z = -xs[mask] if neg else xs[mask]
            aa = (c1 - a1) if neg else a1
            term = np.ones(len(z), dtype=complex)
            total = np.ones(len(z), dtype=complex)
            quiet = np.zeros(len(z), dtype=int)
            k = 1
            while True:
                term = term * ((aa + k - 1.0) / (c1 + k - 1.0)) * z / k
                total = total + term
                small = np.abs(term) < rel_tol * np.abs(total)
                quiet = np.where(small, quiet + 1, 0)
                if np.all(quiet >= 3):
                    break
                if k >= max_terms:
                    raise NonConvergenceError(
                        f"grid 1F1 seed (ell={ell}, n={n}) did not converge")
                k += 1
            out[mask] = np.exp(xs[mask]) * total if neg else total
        pref = ((-1.0) ** n / math.sqrt(math.pi) * math.exp(log_gamma(ell + 0.5))
                * a[n] * np.exp(-xs / 2.0))
        seeds[n] = pref * mu ** (-ell) * out

    c = np.empty((n_max + 1, m), dtype=complex)
    c[0] = seeds[0]
    if n_max >= 1:
        c[1] = seeds[1]
    for n in range(1, n_max):
        c[n + 1] = ((xs - (2.0 * n + ell + 1.5)) * c[n]
                    - math.sqrt(n * (n + ell + 0.5)) * c[n - 1]) \
            / math.sqrt((n + 1.0) * (n + ell + 1.5))
    return s, c


def tn_rn(table: KinematicTable, n: int) -> tuple[complex, complex]:
    """Coefficient-space wave ratios T_n = p-_n / p+_n and R_{n+1} = p+_{n+1} / p+_n.

    T_n is unimodular for x > 0 (ratio of conjugates); both ratios are
    real on the negative-energy continuation.
    """
    if n < 0 or n + 1 > table.n_max:
        raise ValueError(f"need p_plus[{n}] and p_plus[{n + 1}], table has n_max={table.n_max}")
    p_n = table.p_plus[n]
    if abs(p_n) < 1e-300:
        raise ZeroDivisionError(f"p_plus[{n}] vanishes at x = {table.point.x}")
    return table.p_minus[n] / p_n, table.p_plus[n + 1] / p_n


def _basis_row(channel: Channel, r: float, n_terms: int) -> np.ndarray:
    """phi_n(r) for n = 0..n_terms-1, zero when the Gaussian underflows."""
    ell, lam = channel.ell, channel.lam
    y = (lam * r) ** 2
    if y / 2.0 > 745.0:          # exp underflow: the whole row vanishes
        return np.zeros(n_terms)
    a = _norm_array(ell, n_terms - 1)
    lag = laguerre_sequence(ell + 0.5, complex(y), n_terms - 1).real
    return a * (lam * r) ** (ell + 1) * math.exp(-y / 2.0) * lag


def free_wave_reconstruct(channel: Channel, point: SpectralPoint, r: float,
                          n_terms: int, which: str = "sine") -> float:
    """Partial sum sum_{n < n_terms} g_n phi_n(r) of a free-wave expansion.

    The sine branch tends to (kr) j_ell(kr); the cosine branch tends to
    sqrt(2) cos(kr - pi ell/2) at large r (see the module note on the
    cosine normalization).  Convergence in n_terms is conditional, so the
    truncation error oscillates rather than decreasing monotonically.
    """
    if point.x <= 0.0:
        raise ValueError(f"free-wave reconstruction requires x > 0, got {point.x}")
    if r <= 0.0:
        raise ValueError(f"r must be positive, got {r}")
    if n_terms < 1:
        raise ValueError(f"n_terms must be positive, got {n_terms}")
    if which == "sine":
        g = sine_coeffs(channel, point, n_terms - 1).real
    elif which == "cosine":
        g = cosine_coeffs(channel, point, n_terms - 1).real
    else:
        raise ValueError(f"which must be 'sine' or 'cosine', got {which!r}")
    return float(np.dot(g, _basis_row(channel, r, n_terms)))


def energy_ode_residual(channel: Channel, n: int, x: float, h: float,
                        which: str = "sine") -> float:
    """Central-difference residual of the second-order equation in energy.

    The coefficients satisfy

        [x d^2/dx^2 + (1/2) d/dx - ell(ell+1)/(4x) - x/4 + (2n+ell+3/2)/2] g_n(x) = 0,

    so the discretized residual must shrink as O(h^2).
    """
    if not (x > h > 0.0):
        raise ValueError(f"need x > h > 0, got x={x}, h={h}")
    ell = channel.ell

    if which == "sine":
        def g(t: float) -> float:
            return sine_coeffs(channel, SpectralPoint.from_x(t), n)[n].real
    elif which == "cosine":
        def g(t: float) -> float:
            return cosine_coeffs(channel, SpectralPoint.from_x(t), n)[n].real
    else:
        raise ValueError(f"which must be 'sine' or 'cosine', got {which!r}")

    f0, fp, fm = g(x), g(x + h), g(x - h)
    d2 = (fp - 2.0 * f0 + fm) / h**2
    d1 = (fp - fm) / (2.0 * h)
    return (x * d2 + 0.5 * d1 - ell * (ell + 1) / (4.0 * x) * f0
            - 0.25 * x * f0 + 0.5 * (2.0 * n + ell + 1.5) * f0)
