"""Special functions and the variance normalisation of the unit-time process.

Everything downstream (kernels, path generators, coefficient tables) is
normalised so that the driving representation has scale kappa(H) =
1/Gamma(H+1/2); rho(H) is then the variance of the process at time 1 and
rho(1/2) = 1 exactly.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import DomainError, NumericsError

__all__ = [
    "HurstParam",
    "ModelConstants",
    "gamma_fn",
    "kappa_of_h",
    "rho_of_h",
    "rho_cos_form",
    "spectral_variance",
    "model_constants",
]


@dataclass(frozen=True)
class HurstParam:
    """Self-similarity index.  H > 0 always; H = 1 is rejected (rho(1) = inf)."""

    H: float

    def __post_init__(self):
        H = float(self.H)
        if not math.isfinite(H) or H <= 0.0:
            raise DomainError(f"Hurst parameter must be positive, got {H}")
        if H == 1.0:
            raise DomainError("H = 1 is excluded (degenerate linear process)")
        object.__setattr__(self, "H", H)

    def require_fbm_range(self):
        if not 0.0 < self.H < 1.0:
            raise DomainError(f"operation requires 0 < H < 1, got H={self.H}")
        return self.H


def as_hurst(H, fbm_range=True) -> float:
    """Validate a Hurst parameter given as a float or HurstParam."""
    hp = H if isinstance(H, HurstParam) else HurstParam(float(H))
    return hp.require_fbm_range() if fbm_range else hp.H


@dataclass(frozen=True)
class ModelConstants:
    """The (kappa, rho) pair fixing the normalisation for a given H."""

    H: float
    kappa: float
    rho: float


def gamma_fn(x: float) -> float:
    """Gamma function on the reals, poles at non-positive integers excluded."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"gamma_fn pole at non-positive integer x={x}")
    try:
        return math.gamma(x)
    except ValueError as exc:  # pragma: no cover - guarded above
        raise DomainError(f"gamma_fn undefined at x={x}") from exc


def kappa_of_h(H) -> float:
    """Scale constant kappa(H) = 1/Gamma(H+1/2), valid for any H > 0."""
    H = as_hurst(H, fbm_range=False)
    return 1.0 / gamma_fn(H + 0.5)


def rho_of_h(H) -> float:
    """Variance at time 1 of the normalised process.

    Canonical evaluation through the Beta-function form
    kappa^2 (3/2-H)/(2H) B(2-2H, H+1/2), which is regular across H = 1/2;
    rho(1/2) = 1 exactly.
    """
    H = as_hurst(H)
    k = kappa_of_h(H)
    beta = gamma_fn(2.0 - 2.0 * H) * gamma_fn(H + 0.5) / gamma_fn(2.5 - H)
    return k * k * (1.5 - H) / (2.0 * H) * beta


def rho_cos_form(H) -> float:
    """Cross-check form -2 cos(pi H) Gamma(-2H) / pi; singular at H = 1/2."""
    H = as_hurst(H)
    if H == 0.5:
        raise DomainError("cosine form of rho has a removable pole at H=1/2")
    return -2.0 * math.cos(math.pi * H) * gamma_fn(-2.0 * H) / math.pi


def model_constants(H) -> ModelConstants:
    H = as_hurst(H)
    return ModelConstants(H=H, kappa=kappa_of_h(H), rho=rho_of_h(H))


# ---------------------------------------------------------------------------
# Oscillatory integral for the spectral variance
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _gauss_panel(f, a, b):
    """32-point Gauss-Legendre on [a, b]."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def _euler_accelerated_tail(terms):
    """Sum an alternating series by repeated averaging of partial sums.

    ``terms`` are the signed half-period integrals; the underlying magnitudes
    must be monotonically decreasing (true for a decreasing envelope).
    Returns (sum, error_estimate).
    """
    s = np.cumsum(terms)
    prev_last = s[-1]
    while len(s) > 1:
        s = 0.5 * (s[:-1] + s[1:])
        err = abs(s[-1] - prev_last)
        prev_last = s[-1]
    return float(prev_last), float(err) if len(terms) > 1 else abs(float(prev_last))


def _sin_integral_tail(envelope_exponent, start, n_terms=48):
    """Accelerated value of int_start^inf s^p sin(s) ds, start a multiple of pi.

    p = envelope_exponent < 0 so the half-period pieces alternate with a
    decreasing envelope; the Euler-transformed sum converges geometrically.
    """
    p = envelope_exponent
    terms = [
        _gauss_panel(lambda s: s**p * np.sin(s), start + k * math.pi, start + (k + 1) * math.pi)
        for k in range(n_terms)
    ]
    return _euler_accelerated_tail(np.array(terms))


def _cos_integral_tail(envelope_exponent, start, n_terms=48):
    p = envelope_exponent
    terms = [
        _gauss_panel(lambda s: s**p * np.cos(s), start + k * math.pi, start + (k + 1) * math.pi)
        for k in range(n_terms)
    ]
    return _euler_accelerated_tail(np.array(terms))


def spectral_variance(H, tol: float = 1e-8) -> float:
    """Variance at time 1 evaluated from the frequency-domain representation.

    Computes (1/(pi H)) * int_0^inf s^(-2H) sin(s) ds.  The integral is only
    semi-convergent, so it is split per half-period of the sine with the tail
    summed as an accelerated alternating series.  For H > 1/2 the integrand is
    first integrated by parts once, giving the absolutely convergent form
    (2/pi) * int_0^inf s^(-2H-1)(1 - cos s) ds plus an exact power tail.

    Must agree with :func:`rho_of_h`; raises NumericsError if the internal
    error estimate exceeds ``tol``.
    """
    H = as_hurst(H)
    cut = 40 * math.pi  # end of the panel-by-panel head, multiple of 2*pi

    # quad may warn near roundoff on the singular first panel; its returned
    # error estimate is folded into the tolerance check below instead.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if H <= 0.5:
            # head: finite sum of half-period panels (first panel has the
            # s^(1-2H) endpoint shape; adaptive quad handles it)
            head, head_err = quad(
                lambda s: s ** (-2.0 * H) * math.sin(s), 0.0, math.pi,
                epsabs=1e-12, epsrel=1e-12, limit=200,
            )
            for k in range(1, 40):
                head += _gauss_panel(lambda s: s ** (-2.0 * H) * np.sin(s), k * math.pi, (k + 1) * math.pi)
            tail, tail_err = _sin_integral_tail(-2.0 * H, cut)
            value = (head + tail) / (math.pi * H)
            err = (head_err + tail_err) / (math.pi * H)
        else:
            # one integration by parts: d(1-cos s) = sin s ds, boundary terms vanish
            p = -2.0 * H - 1.0
            head, head_err = quad(
                lambda s: s**p * (1.0 - math.cos(s)), 0.0, math.pi,
                epsabs=1e-12, epsrel=1e-12, limit=200,
            )
            for k in range(1, 40):
                head += _gauss_panel(lambda s: s**p * (1.0 - np.cos(s)), k * math.pi, (k + 1) * math.pi)
            power_tail = cut ** (-2.0 * H) / (2.0 * H)  # int_cut^inf s^(-2H-1) ds
            cos_tail, tail_err = _cos_integral_tail(p, cut)
            value = 2.0 / math.pi * (head + power_tail - cos_tail)
            err = 2.0 / math.pi * (head_err + tail_err)

    if not math.isfinite(value) or err > tol:
        raise NumericsError(
            f"spectral variance quadrature did not converge: estimate {value!r}, "
            f"error bound {err:.3e} > tol {tol:.3e} (H={H})"
        )
    return value
