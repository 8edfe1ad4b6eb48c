"""Scattering matrix of a finite tridiagonal interaction.

The interaction is an N x N real symmetric tridiagonal matrix Omega
(2N-1 parameters).  Writing p-hat for the interacting analogue of the
free combinations p+- = c +- i s, the interior rows n = 0..N-1 satisfy

    sum_m (J + Omega)_{n,m} p-hat_m = (sqrt(2) mu / s_0) delta_{n0},

while asymptotically p-hat_n = e^{+-i delta} p+-_n.  Substituting the
tail into the interior rows leaves N unknowns: the interior coefficients
p-hat_0..p-hat_{N-2} and the tail factor beta = e^{i delta}.  Two routes
to the scattering matrix S = e^{2i delta} are implemented:

* ``s_linear_solve``  solves the N x N complex system directly (any N)
  and forms S = beta / conj(beta), which is unimodular by construction
  because J + Omega is real and p- = conj(p+) for x > 0;
* ``s_closed_form``   evaluates the explicit rank-3 expression built from
  T_0 = p-_0/p+_0, R_1, R_2 and the auxiliary Lambda; ranks 1 and 2 are
  obtained by embedding Omega in a rank-3 matrix padded with zeros, so
  restriction is exact by construction.

The two routes are algebraically identical (the equivalence reduces to
the constancy of the discrete Wronskian J_{n,n+1}(s_n c_{n+1} - c_n s_{n+1})
= sqrt(2) mu) and serve as mutual cross-checks.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .kinematics import Channel, KinematicTable, SpectralPoint, build_table, coefficient_grid, jmatrix_bands, tn_rn

__all__ = [
    "InteractionMatrix",
    "ScatteringResult",
    "DenominatorError",
    "SingularSystemError",
    "s_closed_form",
    "s_linear_solve",
    "linear_system",
    "phase_shift_curve",
]


class DenominatorError(ZeroDivisionError):
    """A denominator of the closed-form expression vanished.

    Carries the name of the offending subexpression; these points are
    physically meaningful (poles or zeros) and are never regularized.
    """

    def __init__(self, subexpression: str, x: float):
        super().__init__(f"denominator {subexpression!r} vanishes at x = {x}")
        self.subexpression = subexpression
        self.x = x


class SingularSystemError(ArithmeticError):
    """The interacting linear system is rank-deficient at this point.

    At negative energy this signals a pole (bound state) of the
    continued scattering matrix.
    """


@dataclass(frozen=True)
class InteractionMatrix:
    """Real symmetric tridiagonal interaction with 2N-1 stored parameters."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __init__(self, diag, offdiag=()):
        d = np.atleast_1d(np.asarray(diag, dtype=float))
        o = np.atleast_1d(np.asarray(offdiag, dtype=float)) if len(np.atleast_1d(offdiag)) \
            else np.empty(0, dtype=float)
        if d.ndim != 1 or o.ndim != 1:
            raise ValueError("diag and offdiag must be one-dimensional")
        if len(d) < 1:
            raise ValueError("interaction rank must be at least 1")
        if len(o) != len(d) - 1:
            raise ValueError(
                f"offdiag must have length {len(d) - 1} for rank {len(d)}, got {len(o)}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(o))):
            raise ValueError("interaction entries must be finite")
        d.flags.writeable = False
        o.flags.writeable = False
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", o)

    @property
    def n_rank(self) -> int:
        return len(self.diag)

    @classmethod
    def zero(cls, n_rank: int) -> "InteractionMatrix":
        return cls(np.zeros(n_rank), np.zeros(max(n_rank - 1, 0)))

    def element(self, i: int, j: int) -> float:
        """Entry (i, j), zero outside the stored N x N tridiagonal band."""
        if i > j:
            i, j = j, i
        if i < 0 or j >= self.n_rank:
            return 0.0
        if i == j:
            return float(self.diag[i])
        if j == i + 1:
            return float(self.offdiag[i])
        return 0.0

    def dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        for i, v in enumerate(self.offdiag):
            m[i, i + 1] = m[i + 1, i] = v
        return m


@dataclass(frozen=True)
class ScatteringResult:
    """Unimodular S-matrix value with phase shift and interior data.

    ``delta`` is the principal phase in (-pi/2, pi/2]; the interior
    arrays hold the modulus rho_n > 0 and phase sigma_n of
    p-hat_n / p+_n for n = 0..N-2.
    """

    s_value: complex
    delta: float
    interior_rho: np.ndarray = field(repr=False)
    interior_sigma: np.ndarray = field(repr=False)
    method: str = "linear_solve"


def _coef(table: KinematicTable, omega: InteractionMatrix, n: int, m: int) -> float:
    """(J + Omega)_{n,m} on the tridiagonal band."""
    if m == n:
        return float(table.J_diag[n]) + omega.element(n, n)
    if abs(m - n) == 1:
        return float(table.J_sub[max(n, m)]) + omega.element(n, m)
    return 0.0


def _guard(value: complex, name: str, x: float) -> complex:
    if abs(value) < 1e-300:
        raise DenominatorError(name, x)
    return value


def s_closed_form(table: KinematicTable, omega: InteractionMatrix) -> ScatteringResult:
    """Closed-form scattering matrix for interactions of rank N <= 3.

    Lower ranks are evaluated by zero-padding Omega inside the rank-3
    expression, which makes the restriction chain N=3 -> 2 -> 1 exact by
    construction.  Raises :class:`DenominatorError` naming the vanishing
    subexpression when the evaluation point sits on a pole or zero of
    one of the intermediate ratios.
    """
    n_rank = omega.n_rank
    if n_rank > 3:
        raise ValueError(f"closed form covers rank <= 3, got {n_rank}")
    if table.point.x <= 0.0:
        raise ValueError(f"closed form requires x > 0, got x = {table.point.x}")
    if table.n_max < 3:
        raise ValueError(f"table must hold p_plus up to n = 3, has n_max = {table.n_max}")

    x = table.point.x
    o00, o01, o11 = omega.element(0, 0), omega.element(0, 1), omega.element(1, 1)
    o12, o22 = omega.element(1, 2), omega.element(2, 2)
    j00, j11 = float(table.J_diag[0]), float(table.J_diag[1])
    j01, j12 = float(table.J_sub[1]), float(table.J_sub[2])

    try:
        t0, r1 = tn_rn(table, 0)
        _, r2 = tn_rn(table, 1)
    except ZeroDivisionError as exc:
        raise DenominatorError(str(exc), x) from exc

    f = _guard(j12 + o12, "J12 + Omega12", x)
    b = _guard(j01 + o01, "J01 + Omega01", x)
    w = j12 - o22 * r2
    lam = (j01 / r1 + j11 - o12 * r2 + (j11 + o11) * (o22 * r2 - j12) / f) / b
    rl = _guard(r1 * lam, "R1 * Lambda", x)
    bracket = _guard(lam * (j00 + o00) + w * b / f, "rank-3 bracket", x)

    # e^{-2i xi} with xi = arg(R1 Lambda), formed as a conjugate ratio
    s_val = t0 * (rl.conjugate() / rl) + (1.0 - t0) / rl * (j01 + j00 / r1) / bracket

    d = table.source_term
    p_hat = [d * lam / bracket, d * w / (f * bracket)]
    interior = np.array([p_hat[m] / table.p_plus[m] for m in range(n_rank - 1)])
    return ScatteringResult(
        s_value=complex(s_val),
        delta=cmath.phase(s_val) / 2.0,
        interior_rho=np.abs(interior),
        interior_sigma=np.angle(interior) if len(interior) else np.empty(0),
        method="closed_form",
    )


def linear_system(table: KinematicTable, omega: InteractionMatrix,
                  branch: int = +1) -> tuple[np.ndarray, np.ndarray]:
    """Matrix and source of the interacting system for one wave branch.

    Unknowns are [p-hat_0, ..., p-hat_{N-2}, beta]; the tail columns are
    folded into the last unknown using p-hat_m = beta * p_m for
    m >= N-1, with p = p+ (branch=+1) or p- (branch=-1).
    """
    n_rank = omega.n_rank
    if table.n_max < n_rank:
        raise ValueError(f"table needs n_max >= {n_rank}, has {table.n_max}")
    p = table.p_plus if branch > 0 else table.p_minus
    p_other = table.p_minus if branch > 0 else table.p_plus
    mat = np.zeros((n_rank, n_rank), dtype=complex)
    for n in range(n_rank):
        for m in (n - 1, n, n + 1):
            if m < 0:
                continue
            coef = _coef(table, omega, n, m)
            if m <= n_rank - 2:
                mat[n, m] += coef
            else:
                mat[n, n_rank - 1] += coef * p[m]
    rhs = np.zeros(n_rank, dtype=complex)
    sgn = 1j if branch > 0 else -1j
    rhs[0] = sgn * 2.0 * math.sqrt(2.0) * table.point.mu / (p[0] - p_other[0])
    return mat, rhs


def s_linear_solve(table: KinematicTable, omega: InteractionMatrix) -> ScatteringResult:
    """Scattering matrix from the general-rank linear system (production path).

    Solves the outgoing branch for the interior coefficients and beta,
    then returns S = beta / conj(beta): exactly unimodular, with any
    |beta| != 1 drift confined to the interior moduli.
    """
    if table.point.x <= 0.0:
        raise ValueError(f"linear solve requires x > 0, got x = {table.point.x}")
    n_rank = omega.n_rank
    mat, rhs = linear_system(table, omega, branch=+1)
    sig = np.linalg.svd(mat, compute_uv=False)
    if sig[-1] <= 1e-13 * max(sig[0], 1.0):
        raise SingularSystemError(
            f"interacting system is rank-deficient at x = {table.point.x} "
            f"(singular values {sig[0]:.3e} .. {sig[-1]:.3e})")
    u = np.linalg.solve(mat, rhs)
    beta = u[n_rank - 1]
    s_val = beta / beta.conjugate()
    interior = u[:n_rank - 1] / table.p_plus[:n_rank - 1]
    return ScatteringResult(
        s_value=complex(s_val),
        delta=cmath.phase(s_val) / 2.0,
        interior_rho=np.abs(interior),
        interior_sigma=np.angle(interior) if len(interior) else np.empty(0),
        method="linear_solve",
    )


def tables_on_grid(channel: Channel, x_values: np.ndarray, n_max: int) -> list[KinematicTable]:
    """Kinematic tables for a grid of spectral points in one vectorized pass."""
    s_grid, c_grid = coefficient_grid(channel.ell, x_values, n_max)
    out = []
    for j, x in enumerate(np.asarray(x_values, dtype=float)):
        point = SpectralPoint.from_x(float(x))
        s = s_grid[:, j].copy()
        c = c_grid[:, j].copy()
        jd, js = jmatrix_bands(channel, point, n_max)
        s.flags.writeable = False
        c.flags.writeable = False
        pp, pm = s * 1j + c, c - 1j * s
        pp.flags.writeable = False
        pm.flags.writeable = False
        out.append(KinematicTable(channel=channel, point=point, n_max=n_max,
                                  s=s, c=c, p_plus=pp, p_minus=pm,
                                  J_diag=jd, J_sub=js))
    return out


def unwrap_phases(deltas: np.ndarray) -> np.ndarray:
    """Lift mod-pi principal phases to a continuous curve.

    S determines delta only modulo pi, so each point is shifted by the
    integer multiple of pi that brings it closest to its predecessor.
    Warns when a jump stays at the pi/2 ambiguity limit, which means the
    grid is too coarse to resolve the motion of the phase.
    """
    out = np.empty_like(deltas)
    out[0] = deltas[0]
    coarse = False
    for j in range(1, len(deltas)):
        k = round((out[j - 1] - deltas[j]) / math.pi)
        out[j] = deltas[j] + k * math.pi
        if abs(out[j] - out[j - 1]) > (math.pi / 2.0) * (1.0 - 1e-9):
            coarse = True
    if coarse:
        warnings.warn("phase jump at the pi/2 ambiguity limit: grid too coarse "
                      "to unwrap reliably", stacklevel=2)
    return out


def phase_shift_curve(channel: Channel, omega: InteractionMatrix,
                      x_grid: np.ndarray) -> np.ndarray:
    """Unwrapped phase-shift curve over an ascending grid of x > 0.

    Returns an array of shape (len(x_grid), 2) with columns (x, delta),
    delta lifted from its principal branch so the curve is continuous;
    suitable for plotting delta/pi against energy.
    """
    xs = np.asarray(x_grid, dtype=float)
    if len(xs) == 0:
        return np.empty((0, 2))
    if np.any(xs <= 0.0):
        raise ValueError("phase-shift grid must have x > 0")
    if len(xs) > 1 and not np.all(np.diff(xs) > 0.0):
        raise ValueError("phase-shift grid must be strictly ascending")
    n_max = max(3, omega.n_rank)
    raw = np.array([s_linear_solve(t, omega).delta
                    for t in tables_on_grid(channel, xs, n_max)])
    return np.column_stack([xs, unwrap_phases(raw)])
