"""Transfer kernels between self-similar indices and the operator applying them.

The kernel connecting index J to index H is phi(t/s) s^(H-J) / Gamma(H-J+1),
with

    phi(u) = (H-J) * int_1^u (v^(H+J-1) - 1)(v-1)^(H-J-1) dv + (u-1)^(H-J).

The integral term (called psi here) is regular at v = 1 because the first
factor vanishes linearly there; psi is evaluated by a binomial series near
u = 1 and by quadrature beyond.  Applying the operator to a path uses the
weighted-operator factorisation; a direct kernel sum is kept as a
cross-check mode, backed by memoised cumulative tables so each cell average
costs O(1).
"""

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .errors import DomainError
from .fracops import SampledPath, pi_tilde, riemann_liouville, seg_mean_plus_pow
from .special import gamma_fn

__all__ = ["KernelSpec", "phi_jh", "k0plus", "kplus_neg", "apply_g"]

_SERIES_EDGE = 1.5  # series radius in u for psi; quadrature beyond
_SERIES_TERMS = 88


@dataclass(frozen=True)
class KernelSpec:
    """Pair of indices (J source, H target), both in (0, 1); J = H is identity."""

    J: float
    H: float

    def __post_init__(self):
        for name in ("J", "H"):
            v = float(getattr(self, name))
            if not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
            object.__setattr__(self, name, v)

    @property
    def d(self):
        return self.H - self.J


class _KernelTables:
    """Per-spec series coefficients and cumulative quadrature tables."""

    def __init__(self, spec: KernelSpec):
        self.spec = spec
        c = spec.H + spec.J - 1.0
        d = spec.d
        # psi(1+x) = x^d * sum_m coef[m] x^m, m = 1.., from the binomial
        # series of v^c - 1; converges for x < 1, used for x <= 0.5
        binom = np.empty(_SERIES_TERMS + 1)
        binom[0] = 1.0
        for m in range(1, _SERIES_TERMS + 1):
            binom[m] = binom[m - 1] * (c - m + 1) / m
        m = np.arange(1, _SERIES_TERMS + 1)
        self._series = d * binom[1:] / (d + m)
        self._c, self._d = c, d
        # Psi(1+x) = x^(d+1) sum_q C_q x^q from the product of the psi series
        # with the binomial series of v^(-d-2) (both converge for x < 1)
        binom2 = np.empty(_SERIES_TERMS + 1)
        binom2[0] = 1.0
        for k in range(1, _SERIES_TERMS + 1):
            binom2[k] = binom2[k - 1] * (-d - 2.0 - k + 1) / k
        bm = d * binom[1:] / (d + m)  # psi series coefficients (on x^(d+m))
        conv = np.convolve(bm, binom2)[: _SERIES_TERMS]
        q = np.arange(1, _SERIES_TERMS + 1)
        self._Psi_series_coef = conv / (d + q + 1.0)
        self._nodes = None  # log(u) grid beyond the series edge
        self._psi_interp = None
        self._Psi_interp = None
        self._psi_edge = self.psi_series(_SERIES_EDGE - 1.0)
        self._Psi_edge = self.Psi_series(_SERIES_EDGE - 1.0)
        self._u_max = _SERIES_EDGE

    # --- series region -----------------------------------------------------

    def psi_series(self, x):
        """psi(1+x) for 0 <= x <= 0.5 (scalar or array)."""
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x_arr)
        pos = x_arr > 0
        if np.any(pos):
            xp = x_arr[pos]
            powers = xp[:, None] ** np.arange(1, _SERIES_TERMS + 1)
            out[pos] = xp**self._d * (powers @ self._series)
        return out if np.ndim(x) else float(out[0])

    def Psi_series(self, x):
        """Psi(1+x) for 0 <= x <= 0.5 (scalar or array)."""
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x_arr)
        pos = x_arr > 0
        if np.any(pos):
            xp = x_arr[pos]
            powers = xp[:, None] ** np.arange(1, _SERIES_TERMS + 1)
            out[pos] = xp ** (self._d + 1.0) * (powers @ self._Psi_series_coef)
        return out if np.ndim(x) else float(out[0])

    # --- quadrature region ---------------------------------------------------

    def _integrand(self, v):
        return (v**self._c - 1.0) * (v - 1.0) ** (self._d - 1.0)

    @staticmethod
    def _log_grid(target):
        """Graded log(u) grid: fine near the edge, coarser where psi is power-law."""
        top = math.log(target)
        pieces = [np.arange(math.log(_SERIES_EDGE), min(3.0, top), 0.002)]
        if top > 3.0:
            pieces.append(np.arange(3.0, min(8.0, top), 0.004))
        if top > 8.0:
            pieces.append(np.arange(8.0, top, 0.012))
        pieces.append(np.array([top]))
        return np.concatenate(pieces)

    def ensure(self, u_max):
        """Build (or rebuild) cumulative tables of psi and Psi up to u_max."""
        u_max = max(float(u_max), 4.0)
        if self._u_max >= u_max and self._psi_interp is not None:
            return
        target = u_max * 1.05
        logs = self._log_grid(target)
        nodes = np.exp(logs)
        gl_x, gl_w = np.polynomial.legendre.leggauss(16)
        lo, hi = nodes[:-1], nodes[1:]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        pts = mid[:, None] + half[:, None] * gl_x[None, :]
        d = self._d
        psi_inc = d * half * (self._integrand(pts) @ gl_w)
        psi_vals = self._psi_edge + np.concatenate(([0.0], np.cumsum(psi_inc)))
        psi_interp = PchipInterpolator(logs, psi_vals, extrapolate=False)
        # cumulative Psi(x) = int_1^x psi(u) u^(-d-2) du, series part included.
        # Integrating by parts removes psi from the integrand:
        #   int_a^b psi u^(-d-2) du = (psi(a) a^(-d-1) - psi(b) b^(-d-1))/(d+1)
        #                             + d/(d+1) int_a^b (u^c - 1)(u-1)^(d-1) u^(-d-1) du
        boundary = (psi_vals[:-1] * lo ** (-d - 1.0) - psi_vals[1:] * hi ** (-d - 1.0)) / (d + 1.0)
        explicit = half * ((self._integrand(pts) * pts ** (-d - 1.0)) @ gl_w)
        Psi_inc = boundary + d / (d + 1.0) * explicit
        Psi_vals = self._Psi_edge + np.concatenate(([0.0], np.cumsum(Psi_inc)))
        self._nodes = logs
        self._psi_interp = psi_interp
        self._Psi_interp = PchipInterpolator(logs, Psi_vals, extrapolate=False)
        self._u_max = target

    def psi(self, u):
        """psi on arrays, series below the edge, table interpolation above."""
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        low = u <= _SERIES_EDGE
        out[low] = self.psi_series(u[low] - 1.0)
        if np.any(~low):
            self.ensure(float(np.max(u)))
            out[~low] = self._psi_interp(np.log(u[~low]))
        return out

    def Psi(self, u):
        """Cumulative int_1^u psi(v) v^(J-H-2) dv on arrays."""
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        low = u <= _SERIES_EDGE
        out[low] = self.Psi_series(u[low] - 1.0)
        if np.any(~low):
            self.ensure(float(np.max(u)))
            out[~low] = self._Psi_interp(np.log(u[~low]))
        return out

    def psi_exact(self, u):
        """Scalar psi by direct adaptive quadrature (reference route)."""
        u = float(u)
        if u <= _SERIES_EDGE:
            return float(self.psi_series(u - 1.0))
        val, _ = quad(self._integrand, _SERIES_EDGE, u, epsabs=1e-13, epsrel=1e-12, limit=400)
        return self._psi_edge + self._d * val


_TABLES: dict[tuple[float, float], _KernelTables] = {}
_TABLES_LOCK = threading.Lock()


def _tables(spec: KernelSpec) -> _KernelTables:
    key = (spec.J, spec.H)
    with _TABLES_LOCK:
        tab = _TABLES.get(key)
        if tab is None:
            tab = _KernelTables(spec)
            _TABLES[key] = tab
        return tab


# ---------------------------------------------------------------------------
# Kernel point values
# ---------------------------------------------------------------------------


def phi_jh(u, spec: KernelSpec):
    """The transfer profile phi(u) for u > 1 (scalar or array).

    Identically 1 for J = H; reduces to (u-1)^(H-J) when H + J = 1.
    Scalars take the reference quadrature route; arrays use the memoised
    tables (1e-9 tolerance).
    """
    tab = _tables(spec)
    if np.isscalar(u) or np.asarray(u).ndim == 0:
        u = float(u)
        if u <= 1.0:
            raise DomainError(f"phi is defined for u > 1, got {u}")
        if spec.J == spec.H:
            return 1.0
        return tab.psi_exact(u) + (u - 1.0) ** spec.d
    u = np.asarray(u, dtype=float)
    if np.any(u <= 1.0):
        raise DomainError("phi is defined for u > 1")
    if spec.J == spec.H:
        return np.ones_like(u)
    return tab.psi(u) + (u - 1.0) ** spec.d


def k0plus(t: float, s: float, spec: KernelSpec) -> float:
    """Volterra kernel value phi(t/s) s^(H-J) / Gamma(H-J+1) for 0 < s < t."""
    if not 0.0 < s < t:
        raise DomainError(f"k0plus needs 0 < s < t, got s={s}, t={t}")
    return phi_jh(t / s, spec) * s**spec.d / gamma_fn(spec.d + 1.0)


def kplus_neg(t: float, s: float, spec: KernelSpec) -> float:
    """Negative-halfline kernel phi(s/t) (-t)^(2H) (-s)^(-H-J) / Gamma(H-J+1).

    Defined for s < t < 0.
    """
    if not s < t < 0.0:
        raise DomainError(f"kplus_neg needs s < t < 0, got s={s}, t={t}")
    return (
        phi_jh(s / t, spec)
        * (-t) ** (2.0 * spec.H)
        * (-s) ** (-spec.H - spec.J)
        / gamma_fn(spec.d + 1.0)
    )


# ---------------------------------------------------------------------------
# Cell-averaged kernel weights and the operator itself
# ---------------------------------------------------------------------------


def cell_averaged_weights(eval_times, edges, spec: KernelSpec):
    """Matrix of cell averages of the (J -> H) kernel over [edges_k, edges_k+1].

    Split into the exact power part (t-s)^(H-J) and the psi part, whose cell
    integral reduces to differences of the cumulative table:
    int_a^b psi(t/s) s^(H-J) ds = t^(H-J+1) (Psi(t/a) - Psi(t/b)).
    Cells must satisfy edges >= 0; a cell touching 0 uses Psi evaluated at the
    finite endpoint only, via direct quadrature of the remaining tail.
    """
    t = np.asarray(eval_times, dtype=float)
    edges = np.asarray(edges, dtype=float)
    if np.any(edges < 0.0) or np.any(t <= 0.0):
        raise DomainError("cell_averaged_weights needs nonnegative cells and positive times")
    lo, hi = edges[:-1], edges[1:]
    widths = hi - lo
    d = spec.d
    inv_gamma = 1.0 / gamma_fn(d + 1.0)
    power_part = seg_mean_plus_pow(t, lo, hi, d)

    tab = _tables(spec)
    out = np.zeros((t.size, lo.size))
    active = t[:, None] > lo[None, :]  # cells strictly left of the eval time
    if spec.J == spec.H:
        return inv_gamma * power_part * active

    # a cell touching s = 0 is cut at s = eps0 * hi; psi(t/s) s^d is bounded by
    # max(1, (t/s)^(2H-1)) s^d there, so the neglected piece is O(eps0^(1-H+J))
    eps0 = 1e-9
    t_max = float(np.max(t))
    u_need = t_max / float(np.min(widths))
    if np.any(lo == 0.0):
        u_need = max(u_need, t_max / (float(np.min(hi[lo == 0.0])) * eps0))
    tab.ensure(u_need)
    for i, ti in enumerate(t):
        sel = lo < ti
        a, b, w = lo[sel], np.minimum(hi[sel], ti), widths[sel]
        a = np.where(a == 0.0, b * eps0, a)
        psi_int = ti ** (d + 1.0) * (tab.Psi(ti / a) - tab.Psi(ti / b))
        out[i, sel] = psi_int / w
    return inv_gamma * (power_part * active + out)


def apply_g(f: SampledPath, spec: KernelSpec, mode: str = "factorised") -> SampledPath:
    """Send a path with index J to the corresponding path with index H.

    ``factorised`` (default) chains the weighted increment operators around a
    fractional integral of order H-J; ``kernel_sum`` evaluates the direct
    Volterra sum with cell-averaged kernels as a cross-check.
    Requires f(0) = 0 on a grid starting at 0.
    """
    if spec.J == spec.H:
        return f
    f.assert_pinned("apply_g")
    if f.times[0] != 0.0 or f.left_origin != 0.0:
        raise DomainError("apply_g needs a grid pinned at t = 0")
    if mode == "factorised":
        g1 = pi_tilde(f, 1.0 - spec.H - spec.J)
        g2 = riemann_liouville(g1, spec.d)
        return pi_tilde(g2, spec.H + spec.J - 1.0)
    if mode == "kernel_sum":
        w = cell_averaged_weights(f.times[1:], f.times, spec)
        vals = np.concatenate(([0.0], w @ np.diff(f.values)))
        return SampledPath(f.times, vals, left_origin=0.0)
    raise DomainError(f"mode must be 'factorised' or 'kernel_sum', got {mode!r}")
