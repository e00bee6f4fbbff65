"""Coefficients of the exact trigonometric expansion on [0, 1] and their asymptotics.

The process on [0, 1] expands as a0*xi0*t + sum a_n ((cos(pi n t)-1) xi_n +
sin(pi n t) xi'_n) with a_n = sqrt(b_n); the b_n are Fourier cosine
coefficients of rho |t|^(2H) - a0^2 t^2 on [-1, 1] and are nonnegative only
for admissible a0.  The choice a0 = sqrt(rho H) is admissible for every H.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FeasibilityError, NumericsError
from .special import as_hurst, rho_of_h

__all__ = [
    "SeriesCoeffs",
    "b_n",
    "coeff_table",
    "default_a0",
    "asymptotic_check",
    "feasibility_boundary",
    "f_h_partial",
    "tail_bound",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_HEAD_TERMS = 24


@dataclass(frozen=True)
class SeriesCoeffs:
    """Coefficient table up to truncation order N (arrays indexed n = 1..N)."""

    H: float
    a0: float
    b: np.ndarray
    a: np.ndarray
    N: int


def default_a0(H) -> float:
    """The universally admissible drift coefficient sqrt(rho(H) * H)."""
    H = as_hurst(H)
    return math.sqrt(rho_of_h(H) * H)


def _head_series_sum(nu, cosine: bool):
    """sum over the power series of int_0^(1/n) t^nu {1-cos, cos}(pi n t) dt.

    Equals n^(-nu-1) * S with S independent of n:
    1-cos: S = sum_{k>=1} (-1)^(k+1) pi^(2k) / ((2k)! (2k+nu+1))
    cos:   S = sum_{k>=0} (-1)^k    pi^(2k) / ((2k)! (2k+nu+1))
    """
    k = np.arange(1, _HEAD_TERMS + 1)
    terms = (-1.0) ** (k + 1) * math.pi ** (2 * k) / (
        np.array([math.factorial(2 * int(j)) for j in k], dtype=float) * (2 * k + nu + 1.0)
    )
    s = float(np.sum(terms))
    if cosine:
        return 1.0 / (nu + 1.0) - s  # k = 0 term plus sign-flipped series
    return s


def _oscillatory_tail(nu, n):
    """int_(1/n)^1 t^nu cos(pi n t) dt by Gauss panels per half-period."""
    if n < 2:
        return 0.0
    k = np.arange(1, n)
    lo = k / n
    hi = (k + 1) / n
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = pts**nu * np.cos(math.pi * n * pts)
    return float(np.sum(half * (vals @ _GL_W)))


def _weighted_cos_integral(nu, n):
    """int_0^1 t^nu cos(pi n t) dt, nu > -1, singular endpoint handled by series."""
    head = _head_series_sum(nu, cosine=True) * float(n) ** (-nu - 1.0)
    return head + _oscillatory_tail(nu, n)


def _weighted_one_minus_cos_integral(nu, n):
    """int_0^1 t^nu (1 - cos(pi n t)) dt, valid for nu > -2."""
    head = _head_series_sum(nu, cosine=False) * float(n) ** (-nu - 1.0)
    if n < 2:
        return head
    power = (1.0 - float(n) ** (-nu - 1.0)) / (nu + 1.0)
    return head + power - _oscillatory_tail(nu, n)


def b_n(H, a0: float, n: int) -> float:
    """Fourier coefficient b_n for drift coefficient a0 (may be negative)."""
    H = as_hurst(H)
    if a0 < 0:
        raise DomainError(f"a0 must be nonnegative, got {a0}")
    n = int(n)
    if n < 1:
        raise DomainError(f"coefficient index must be >= 1, got {n}")
    rho = rho_of_h(H)
    pin2 = (math.pi * n) ** 2
    sign = -1.0 if n % 2 else 1.0
    if H == 0.5:
        return ((1.0 - sign) + 2.0 * a0**2 * sign) / pin2
    if H < 0.5:
        J = _weighted_one_minus_cos_integral(2.0 * H - 2.0, n)
        if not math.isfinite(J):
            raise NumericsError(f"quadrature failed for b_{n} at H={H}")
        return (
            2.0 * H * (1.0 - 2.0 * H) * rho * J / pin2
            + (2.0 * H * rho * (1.0 - sign) + 2.0 * a0**2 * sign) / pin2
        )
    C = _weighted_cos_integral(2.0 * H - 2.0, n)
    if not math.isfinite(C):
        raise NumericsError(f"quadrature failed for b_{n} at H={H}")
    return 2.0 * H * (2.0 * H - 1.0) * rho * C / pin2 + (2.0 * a0**2 - 2.0 * rho * H) * sign / pin2


def _b_array(H, a0, N):
    return np.array([b_n(H, a0, n) for n in range(1, N + 1)])


def coeff_table(H, a0: float | None = None, N: int = 1024) -> SeriesCoeffs:
    """All coefficients up to order N; fails loudly on any negative b_n."""
    H = as_hurst(H)
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if a0 is None:
        a0 = default_a0(H)
    b = _b_array(H, a0, N)
    bad = np.flatnonzero(b < 0.0)
    if bad.size:
        first = int(bad[0]) + 1
        raise FeasibilityError(
            f"a0={a0!r} is infeasible at H={H}: b_{first} = {b[bad[0]]!r} < 0", n=first
        )
    return SeriesCoeffs(H=H, a0=float(a0), b=b, a=np.sqrt(b), N=N)


@dataclass(frozen=True)
class AsymptoticReport:
    residuals: np.ndarray
    slope: float
    expected_slope: float
    exact: bool


def asymptotic_check(coeffs: SeriesCoeffs, n_min: int = 64) -> AsymptoticReport:
    """Fit of |a_n (pi n)^(H+1/2) - 1| against the predicted n^(2H-3) decay.

    Raises NumericsError if the fitted slope exceeds the prediction by more
    than 0.3 (slower decay than the theory allows).
    """
    H = coeffs.H
    n = np.arange(1, coeffs.N + 1)
    r = coeffs.a * (math.pi * n) ** (H + 0.5) - 1.0
    expected = 2.0 * H - 3.0
    sel = (n >= n_min) & (np.abs(r) > 1e-14)
    if np.count_nonzero(sel) < 8:
        return AsymptoticReport(residuals=r, slope=-math.inf, expected_slope=expected, exact=True)
    slope = float(np.polyfit(np.log(n[sel]), np.log(np.abs(r[sel])), 1)[0])
    if slope > expected + 0.3:
        raise NumericsError(
            f"coefficient residuals decay too slowly: slope {slope:.3f} vs expected {expected:.3f}"
        )
    return AsymptoticReport(residuals=r, slope=slope, expected_slope=expected, exact=False)


def feasibility_boundary(H, N_max: int = 4096, tol: float = 1e-6) -> dict:
    """Largest admissible a0, located by bisection over the first N_max terms.

    Only meaningful for H < 1/2 (above, the admissible set is a single point).
    The finite-N nature is recorded: ``flagged_uncertain`` is set when the
    binding coefficient index is close to N_max, where the untested tail
    could still bite.
    """
    H = as_hurst(H)
    if H >= 0.5:
        raise DomainError("the feasibility boundary is a nondegenerate interval only for H < 1/2")
    rho = rho_of_h(H)
    lo = math.sqrt(2.0 * rho * H)  # always feasible for H < 1/2

    def first_violation(a0):
        b = _b_array(H, a0, N_max)
        bad = np.flatnonzero(b < 0.0)
        return int(bad[0]) + 1 if bad.size else None

    hi = lo * 1.5
    while first_violation(hi) is None:
        hi *= 1.5
    while hi - lo > tol:
        midpoint = 0.5 * (lo + hi)
        if first_violation(midpoint) is None:
            lo = midpoint
        else:
            hi = midpoint
    binding = first_violation(hi)
    return {
        "a_boundary": lo,
        "binding_n": binding,
        "N_max": N_max,
        "flagged_uncertain": binding is not None and binding > N_max // 2,
    }


def f_h_partial(coeffs: SeriesCoeffs, t) -> np.ndarray:
    """Partial-sum variance profile a0^2 t^2 + 2 sum b_n (1 - cos(pi n t))."""
    t = np.asarray(t, dtype=float)
    n = np.arange(1, coeffs.N + 1)
    osc = 1.0 - np.cos(math.pi * n[:, None] * t[None, :])
    return coeffs.a0**2 * t**2 + 2.0 * (coeffs.b @ osc)


def tail_bound(coeffs: SeriesCoeffs, margin: float = 1.5) -> float:
    """Bound on 4 sum_{n>N} a_n^2 from the (pi n)^(-2H-1) asymptotic scale."""
    H, N = coeffs.H, coeffs.N
    return margin * 4.0 * math.pi ** (-2.0 * H - 1.0) * N ** (-2.0 * H) / (2.0 * H)
