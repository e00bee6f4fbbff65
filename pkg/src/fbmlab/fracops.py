"""Fractional-calculus and time-inversion operators on sampled paths.

Paths are interpreted as piecewise-linear interpolants of their samples.
Every singular kernel (t-s)^(a-1) is integrated in closed form against
constant-slope segments, so each operator is exact on the interpolant and
discretisation error is attributable solely to interpolation of the input.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, PreconditionError
from .special import gamma_fn

__all__ = [
    "SampledPath",
    "FracOrder",
    "HolderParams",
    "TrigPoly",
    "riemann_liouville",
    "itilde",
    "pi_mult",
    "pi_tilde",
    "time_invert",
    "t_hl",
    "holder_seminorm",
    "periodic_frac",
    "periodic_apply_path",
]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampledPath:
    """A real function sampled on a strictly increasing grid.

    ``left_origin`` is the base point where the path value is pinned
    (typically 0); operators that integrate from the origin assert
    f(left_origin) = 0.
    """

    times: np.ndarray
    values: np.ndarray
    left_origin: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or v.shape != t.shape:
            raise PreconditionError("times and values must be 1-d arrays of equal length")
        if t.size < 2:
            raise PreconditionError("a sampled path needs at least 2 points")
        if not np.all(np.diff(t) > 0):
            raise PreconditionError("times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise PreconditionError("times and values must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "left_origin", float(self.left_origin))

    def __len__(self):
        return self.times.size

    def interp(self, t):
        """Piecewise-linear interpolant evaluated at t (clamped outside)."""
        return np.interp(t, self.times, self.values)

    def origin_index(self):
        i = int(np.searchsorted(self.times, self.left_origin))
        if i < len(self.times) and self.times[i] == self.left_origin:
            return i
        return None

    def assert_pinned(self, op_name, tol=1e-12):
        i = self.origin_index()
        if i is None:
            raise PreconditionError(f"{op_name}: grid does not contain the origin {self.left_origin}")
        scale = float(np.max(np.abs(self.values))) or 1.0
        if abs(self.values[i]) > tol * scale:
            raise PreconditionError(
                f"{op_name}: path must vanish at its origin, got f({self.left_origin}) = {self.values[i]!r}"
            )


@dataclass(frozen=True)
class FracOrder:
    """Order of a fractional integral (alpha > 0) or derivative (alpha < 0)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (-1.0 < a <= 1.0):
            raise DomainError(f"fractional order must satisfy -1 < alpha <= 1, got {a}")
        object.__setattr__(self, "alpha", a)


def _order(alpha) -> float:
    return alpha.alpha if isinstance(alpha, FracOrder) else FracOrder(float(alpha)).alpha


@dataclass(frozen=True)
class HolderParams:
    """Weighted Hoelder exponents: local index beta, small/large-time weights."""

    beta: float
    gamma: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie in (0,1), got {self.beta}")


# ---------------------------------------------------------------------------
# Closed-form segment averages
# ---------------------------------------------------------------------------


def _powplus(x, p):
    """x_+^p, elementwise, with 0 for x <= 0."""
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = x[pos] ** p
    return out


def seg_mean_plus_pow(t, lo, hi, p):
    """Mean of (t-s)_+^p over segments [lo_k, hi_k], for each eval time t.

    t has shape (m, 1) or (m,), lo/hi shape (n,); returns (m, n).
    Exact: ((t-lo)_+^(p+1) - (t-hi)_+^(p+1)) / ((p+1)(hi-lo)).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    num = _powplus(t - lo, p + 1.0) - _powplus(t - hi, p + 1.0)
    return num / ((p + 1.0) * (hi - lo))


def seg_mean_pow(lo, hi, p):
    """Mean of s^p over [lo_k, hi_k] with 0 <= lo < hi, exact closed form."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo < 0):
        raise DomainError("segment averages of s^p need s >= 0")
    if p <= -1.0 and np.any(lo == 0):
        raise DomainError(f"s^{p} is not integrable on a segment touching 0")
    if p == -1.0:
        return (np.log(hi) - np.log(lo)) / (hi - lo)
    return (hi ** (p + 1.0) - lo ** (p + 1.0)) / ((p + 1.0) * (hi - lo))


_ROW_BLOCK = 1024  # cap transient (m x n) weight blocks at ~32 MB


# ---------------------------------------------------------------------------
# Riemann-Liouville integral/derivative with finite left horizon
# ---------------------------------------------------------------------------


def riemann_liouville(f: SampledPath, alpha, eval_times=None) -> SampledPath:
    """Fractional integral (alpha > 0) or derivative (alpha < 0) from the origin.

    Uses the increment form sum_k df_k * <(t-s)^alpha>_k with closed-form
    segment averages, valid for any alpha > -1; for alpha < 0 the path must be
    sampled densely enough that its interpolant is Hoelder of index > -alpha
    (documented, not checked).
    """
    a = _order(alpha)
    f.assert_pinned("riemann_liouville")
    if f.times[0] != f.left_origin:
        raise PreconditionError("riemann_liouville: grid must start at the origin")
    if a == 0.0:
        return f
    t_out = f.times if eval_times is None else np.asarray(eval_times, dtype=float)
    lo, hi = f.times[:-1], f.times[1:]
    df = np.diff(f.values)
    inv_gamma = 1.0 / gamma_fn(a + 1.0)
    out = np.empty_like(t_out)
    for i in range(0, t_out.size, _ROW_BLOCK):
        blk = t_out[i : i + _ROW_BLOCK]
        out[i : i + _ROW_BLOCK] = inv_gamma * seg_mean_plus_pow(blk, lo, hi, a) @ df
    return SampledPath(t_out, out, left_origin=f.left_origin) if eval_times is not None else replace(f, values=out)


def rl_cell_average_weights(eval_times, edges, alpha):
    """Cell-averaged kernel matrix <(t-s)_+^alpha>/Gamma(alpha+1).

    Rows index ``eval_times``, columns the cells of ``edges``.  This is the
    weight matrix of the increment form; generators apply it to many paths of
    increments at once.  Valid for any alpha > -1.
    """
    if alpha <= -1.0:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    edges = np.asarray(edges, dtype=float)
    return seg_mean_plus_pow(eval_times, edges[:-1], edges[1:], alpha) / gamma_fn(alpha + 1.0)


# ---------------------------------------------------------------------------
# Infinite-horizon (normalised) operators
# ---------------------------------------------------------------------------


def itilde(f: SampledPath, alpha, side: str = "+", eval_times=None) -> SampledPath:
    """Normalised infinite-horizon operator, pinned to vanish at time 0.

    Increments outside the sampled grid are taken to be zero (f constant
    beyond the grid); the induced truncation tail is the caller's concern --
    a rigorous cutoff criterion does not exist for a finite window, so choose
    the horizon generously (default guidance: 100x the evaluation horizon).
    """
    a = _order(alpha)
    if side not in ("+", "-"):
        raise DomainError(f"side must be '+' or '-', got {side!r}")
    i0 = int(np.searchsorted(f.times, 0.0))
    if i0 >= len(f.times) or f.times[i0] != 0.0:
        raise PreconditionError("itilde: grid must contain t = 0")
    scale = float(np.max(np.abs(f.values))) or 1.0
    if abs(f.values[i0]) > 1e-12 * scale:
        raise PreconditionError("itilde: path must satisfy f(0) = 0")
    if a == 0.0:
        return f

    t_out = f.times if eval_times is None else np.asarray(eval_times, dtype=float)
    lo, hi = f.times[:-1], f.times[1:]
    df = np.diff(f.values)
    inv_gamma = 1.0 / gamma_fn(a + 1.0)
    # per-segment mean of the anchor kernel: (-s)_+^a for '+', s_+^a for '-'
    if side == "+":
        anchor = seg_mean_plus_pow(np.array([0.0]), lo, hi, a)[0]
    else:
        anchor = _seg_mean_shift_minus(np.array([0.0]), lo, hi, a)[0]
    out = np.empty_like(t_out)
    for i in range(0, t_out.size, _ROW_BLOCK):
        blk = t_out[i : i + _ROW_BLOCK]
        if side == "+":
            w = seg_mean_plus_pow(blk, lo, hi, a) - anchor
        else:
            w = anchor - _seg_mean_shift_minus(blk, lo, hi, a)
        out[i : i + _ROW_BLOCK] = inv_gamma * (w @ df)
    if eval_times is not None:
        return SampledPath(t_out, out, left_origin=0.0)
    return SampledPath(f.times, out, left_origin=0.0)


def _seg_mean_shift_minus(t, lo, hi, p):
    """Mean of (s-t)_+^p over segments [lo_k, hi_k] for each t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    num = _powplus(hi - t, p + 1.0) - _powplus(lo - t, p + 1.0)
    return num / ((p + 1.0) * (hi - lo))


def itilde_tail_estimate(f: SampledPath, alpha, side: str = "+") -> float:
    """Crude magnitude of the neglected increments beyond the sampled window.

    Scales like |alpha| * max|f| * A^(alpha-1) for window size A; reported so
    callers can judge the truncation, never asserted.
    """
    a = _order(alpha)
    if a == 0.0:
        return 0.0
    span = float(f.times[-1] - f.times[0])
    scale = float(np.max(np.abs(f.values))) or 0.0
    return abs(a) * scale * max(span, 1.0) ** (a - 1.0) / gamma_fn(a + 1.0)


# ---------------------------------------------------------------------------
# Multiplication-type operators
# ---------------------------------------------------------------------------


def pi_mult(f: SampledPath, alpha: float) -> SampledPath:
    """Pointwise product t^alpha f(t)."""
    alpha = float(alpha)
    if alpha < 0 and f.times[0] <= 0.0:
        raise DomainError("pi_mult with alpha < 0 needs strictly positive times")
    if np.any(f.times < 0.0):
        raise DomainError("pi_mult is defined on nonnegative times")
    return replace(f, values=f.times**alpha * f.values)


def pi_tilde(f: SampledPath, alpha: float) -> SampledPath:
    """Weighted increment integral int_0^t s^alpha df(s), exact on the interpolant.

    Increments before the first sample are taken as zero; convergence of the
    first cell needs alpha + kappa > 0 for the path's small-time exponent
    kappa (documented, not checked beyond integrability of s^alpha itself).
    """
    alpha = float(alpha)
    if np.any(f.times < 0.0):
        raise DomainError("pi_tilde is defined on nonnegative times")
    wbar = seg_mean_pow(f.times[:-1], f.times[1:], alpha)
    inc = wbar * np.diff(f.values)
    out = np.concatenate(([0.0], np.cumsum(inc)))
    return replace(f, values=out)


# ---------------------------------------------------------------------------
# Time inversion
# ---------------------------------------------------------------------------


def time_invert(f: SampledPath, alpha: float, variant: str = "T") -> SampledPath:
    """Time inversion t -> 1/t on the reciprocal grid (re-sorted, not resampled).

    T  : t^(2a) f(1/t).
    T' : t^(2a) f(1/t) - 2a int_{1/t}^inf s^(-2a-1) f(s) ds, with the tail
         integral computed on the sampled support only (the path must decay or
         the horizon must dominate the neglected tail).
    """
    alpha = float(alpha)
    if variant not in ("T", "Tprime"):
        raise DomainError(f"variant must be 'T' or 'Tprime', got {variant!r}")
    if f.times[0] <= 0.0:
        raise DomainError("time inversion needs strictly positive times")
    u = (1.0 / f.times)[::-1]
    base = u ** (2.0 * alpha) * f.values[::-1]
    if variant == "T":
        return SampledPath(u, base, left_origin=0.0)

    # cumulative tail integral Q(x) = int_x^{t_max} s^(-2a-1) f(s) ds
    lo, hi = f.times[:-1], f.times[1:]
    slope = np.diff(f.values) / (hi - lo)
    const = f.values[:-1] - slope * lo  # f(s) = const + slope*s on the segment
    nu = -2.0 * alpha - 1.0
    seg = const * _pow_primitive_diff(lo, hi, nu) + slope * _pow_primitive_diff(lo, hi, nu + 1.0)
    q_at = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))  # Q at each grid time
    out = base - 2.0 * alpha * q_at[::-1]
    return SampledPath(u, out, left_origin=0.0)


def _pow_primitive_diff(lo, hi, p):
    """int_lo^hi s^p ds, elementwise, with the log form at p = -1."""
    if p == -1.0:
        return np.log(hi) - np.log(lo)
    return (hi ** (p + 1.0) - lo ** (p + 1.0)) / (p + 1.0)


def t_hl(f: SampledPath, H: float, L: float) -> SampledPath:
    """Law-preserving filter f(t) - 2L t^(H-L) int_0^t f(s) s^(L-H-1) ds.

    Annihilates t^(H+L); the weighted integral is exact on the interpolant.
    The path's small-time exponent must exceed H - L for integrability
    (documented; the linear first cell needs H - L < 1, which is checked).
    """
    H, L = float(H), float(L)
    if L <= 0.0:
        raise DomainError(f"t_hl needs L > 0, got {L}")
    if H <= 0.0:
        raise DomainError(f"t_hl needs H > 0, got {H}")
    f.assert_pinned("t_hl")
    if f.times[0] != f.left_origin or f.left_origin != 0.0:
        raise PreconditionError("t_hl: grid must start at the pinned origin t = 0")
    nu = L - H - 1.0
    if nu + 2.0 <= 0.0:
        raise DomainError("t_hl needs H - L < 1 for the first-cell integral to converge")
    lo, hi = f.times[:-1], f.times[1:]
    slope = np.diff(f.values) / (hi - lo)
    const = f.values[:-1] - slope * lo
    seg = np.empty_like(slope)
    # first cell from 0: f = slope*s there (f(0)=0), only the slope term integrates
    seg[0] = slope[0] * hi[0] ** (nu + 2.0) / (nu + 2.0)
    if len(lo) > 1:
        seg[1:] = const[1:] * _pow_primitive_diff(lo[1:], hi[1:], nu) + slope[1:] * _pow_primitive_diff(
            lo[1:], hi[1:], nu + 1.0
        )
    integral = np.concatenate(([0.0], np.cumsum(seg)))
    out = np.empty_like(f.values)
    out[0] = 0.0
    out[1:] = f.values[1:] - 2.0 * L * f.times[1:] ** (H - L) * integral[1:]
    return replace(f, values=out)


# ---------------------------------------------------------------------------
# Dyadic Hoelder seminorm
# ---------------------------------------------------------------------------


def holder_seminorm(f: SampledPath, p: HolderParams) -> float:
    """Sup over dyadic blocks [2^n, 2^(n+1)] of |f(t)-f(s)| / ((2^n)^(g,d) (t-s)^b).

    Restricted to grid pairs; times must be positive.
    """
    if f.times[0] <= 0.0:
        raise DomainError("holder_seminorm needs strictly positive times")
    n_lo = math.floor(math.log2(f.times[0]))
    n_hi = math.ceil(math.log2(f.times[-1]))
    best = 0.0
    for n in range(n_lo, n_hi + 1):
        lo, hi = 2.0**n, 2.0 ** (n + 1)
        sel = (f.times >= lo) & (f.times <= hi)
        if np.count_nonzero(sel) < 2:
            continue
        t = f.times[sel]
        v = f.values[sel]
        dt = t[None, :] - t[:, None]
        dv = v[None, :] - v[:, None]
        iu = np.triu_indices(t.size, k=1)
        weight = lo**p.gamma if lo <= 1.0 else lo**p.delta
        ratios = np.abs(dv[iu]) / (weight * dt[iu] ** p.beta)
        if ratios.size:
            best = max(best, float(np.max(ratios)))
    return best


# ---------------------------------------------------------------------------
# Periodic operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrigPoly:
    """Coefficients on the basis t, cos(r_n t)-1, sin(r_n t) of one variant.

    hat: r_n = 2*pi*n (n >= 1) plus a linear drift coefficient.
    bar: r_n = (2n+1)*pi (n >= 0), no drift.
    """

    variant: str
    cos: np.ndarray
    sin: np.ndarray
    drift: float = 0.0

    def __post_init__(self):
        if self.variant not in ("hat", "bar"):
            raise DomainError(f"variant must be 'hat' or 'bar', got {self.variant!r}")
        c = np.asarray(self.cos, dtype=float)
        s = np.asarray(self.sin, dtype=float)
        if c.shape != s.shape or c.ndim != 1:
            raise DomainError("cos and sin coefficient arrays must match in length")
        if self.variant == "bar" and self.drift != 0.0:
            raise DomainError("the antiperiodic variant carries no drift coefficient")
        object.__setattr__(self, "cos", c)
        object.__setattr__(self, "sin", s)

    def frequencies(self):
        n = np.arange(self.cos.size)
        return 2.0 * math.pi * (n + 1) if self.variant == "hat" else math.pi * (2 * n + 1)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        r = self.frequencies()
        phase = r[:, None] * t[None, :]
        out = self.cos @ (np.cos(phase) - 1.0) + self.sin @ np.sin(phase)
        return out + self.drift * t


def periodic_frac(coeffs: TrigPoly, alpha, variant: str | None = None) -> TrigPoly:
    """Frequency-wise rotation-and-scale: factor r^(-alpha), phase alpha*pi/2.

    The drift coefficient is held fixed (the linear mode maps to itself by
    convention).  Pure linear map; exact.
    """
    a = _order(alpha)
    if variant is not None and variant != coeffs.variant:
        raise DomainError(f"coefficients are {coeffs.variant!r}, requested {variant!r}")
    if a == 0.0:
        return coeffs
    r = coeffs.frequencies()
    theta = a * math.pi / 2.0
    scale = r ** (-a)
    new_cos = scale * (math.cos(theta) * coeffs.cos - math.sin(theta) * coeffs.sin)
    new_sin = scale * (math.sin(theta) * coeffs.cos + math.cos(theta) * coeffs.sin)
    return TrigPoly(coeffs.variant, new_cos, new_sin, drift=coeffs.drift)


def _uniform_unit_grid(f: SampledPath):
    n = len(f) - 1
    h = 1.0 / n
    if abs(f.times[0]) > 1e-12 or abs(f.times[-1] - 1.0) > 1e-12:
        raise PreconditionError("periodic operators need a grid spanning [0, 1]")
    if np.max(np.abs(np.diff(f.times) - h)) > 1e-9 * h:
        raise PreconditionError("periodic operators need a uniform grid")
    return n


def periodic_apply_path(f: SampledPath, alpha, variant: str = "hat") -> SampledPath:
    """Apply the periodic operator to a path sampled uniformly on [0, 1].

    The sampled path is identified with its trigonometric interpolant via the
    FFT; each mode is rotated and scaled per the trigonometric eigenrelation,
    and the result is pinned to vanish at t = 0.  For the hat variant the
    linear drift f(1) t is split off and restored unchanged.
    """
    a = _order(alpha)
    n = _uniform_unit_grid(f)
    if a == 0.0:
        return f
    theta = a * math.pi / 2.0
    if variant == "hat":
        d = f.values[-1]
        g = f.values[:-1] - d * f.times[:-1]
        spec = np.fft.rfft(g)
        j = np.arange(spec.size)
        r = 2.0 * math.pi * j
        mult = np.zeros(spec.size, dtype=complex)
        mult[1:] = r[1:] ** (-a) * np.exp(-1j * theta)
        if n % 2 == 0:
            mult[-1] = r[-1] ** (-a) * math.cos(theta)  # sine at Nyquist invisible on grid
        out = np.fft.irfft(mult * spec, n)
        out -= out[0]
        vals = np.concatenate((out, [out[0]])) + d * f.times
        return replace(f, values=vals)
    if variant == "bar":
        # extend with 1-antiperiodic increments to period 2, then as above
        h = np.concatenate((f.values[:-1], f.values[-1] - f.values[:-1]))
        spec = np.fft.rfft(h)
        j = np.arange(spec.size)
        r = math.pi * j
        mult = np.zeros(spec.size, dtype=complex)
        mult[1:] = r[1:] ** (-a) * np.exp(-1j * theta)
        mult[-1] = r[-1] ** (-a) * math.cos(theta)
        out = np.fft.irfft(mult * spec, 2 * n)
        out -= out[0]
        vals = np.concatenate((out[:n], [out[n]]))
        return replace(f, values=vals)
    raise DomainError(f"variant must be 'hat' or 'bar', got {variant!r}")
