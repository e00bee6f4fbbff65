"""Gaussian law comparison: product-measure criterion, entropy bounds,
single-path covariance recovery, and the equivalence/singularity verdict table.

Finite sums cannot certify convergence of an infinite series, so the
numerical classifier returns ``undecided`` whenever the evidence straddles
its thresholds; analytic verdicts are reported separately and numeric
diagnostics are labelled as consistency evidence, never as proofs.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import coeff_table
from .errors import DomainError
from .fracops import SampledPath
from .special import as_hurst, rho_of_h

__all__ = [
    "VarSeqPair",
    "LawReport",
    "kakutani",
    "cherid_decide",
    "entropy_bound",
    "pinsker_tv",
    "ergodic_cov",
    "equivalence_table",
    "rl_entropy_scaling",
    "small_time_tv_scaling",
    "periodic_coefficient_check",
]


@dataclass(frozen=True)
class VarSeqPair:
    """Two positive variance sequences of equal length."""

    sigma2: np.ndarray
    sigma2_bar: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma2, dtype=float)
        sb = np.asarray(self.sigma2_bar, dtype=float)
        if s.shape != sb.shape or s.ndim != 1:
            raise DomainError("variance sequences must be 1-d and of equal length")
        if np.any(s <= 0) or np.any(sb <= 0):
            raise DomainError("variances must be strictly positive")
        object.__setattr__(self, "sigma2", s)
        object.__setattr__(self, "sigma2_bar", sb)

    def swapped(self):
        return VarSeqPair(self.sigma2_bar, self.sigma2)


@dataclass
class LawReport:
    verdict: str  # equivalent | singular | undecided
    statistic: float
    diagnostics: dict = field(default_factory=dict)


_SLOPE_SINGULAR = 0.05
_INCREMENT_FRACTION = 1e-8


def kakutani(pair: VarSeqPair, N_min: int = 64) -> LawReport:
    """Partial sums of sum (sigma_bar^2/sigma^2 - 1)^2 with a 3-way verdict.

    equivalent: the last-quartile increments are negligible against the total
    (the sum has numerically converged); singular: the partial sums still grow
    at a fitted log-log slope above 0.05; otherwise undecided.
    """
    N = pair.sigma2.size
    if N < N_min:
        raise DomainError(f"need at least {N_min} terms, got {N}")
    terms = (pair.sigma2_bar / pair.sigma2 - 1.0) ** 2
    partial = np.cumsum(terms)
    total = float(partial[-1])
    diagnostics = {"partial_sums": partial, "total": total}
    if total == 0.0:
        return LawReport("equivalent", 0.0, diagnostics)

    # decay exponent of the terms themselves (used by analytic cross-checks)
    m = np.arange(1, N + 1)
    tail = (m >= max(N // 4, 8)) & (terms > 0)
    if np.count_nonzero(tail) >= 8:
        p_hat = -float(np.polyfit(np.log(m[tail]), np.log(terms[tail]), 1)[0])
    else:
        p_hat = math.inf
    diagnostics["term_decay_exponent"] = p_hat

    last_quartile = terms[3 * N // 4 :]
    if float(np.max(last_quartile)) < _INCREMENT_FRACTION * total:
        return LawReport("equivalent", total, diagnostics)
    sel = m >= N // 2
    slope = float(np.polyfit(np.log(m[sel]), np.log(partial[sel]), 1)[0])
    diagnostics["partial_sum_slope"] = slope
    if slope > _SLOPE_SINGULAR:
        return LawReport("singular", total, diagnostics)
    return LawReport("undecided", total, diagnostics)


def cherid_decide(J, H, lam: float, N: int = 4096, band: float = 0.18) -> LawReport:
    """Is a pure index-J path distinguishable from one corrupted at index H?

    Builds the exact coefficient variances at J and the asymptotic scale at H,
    runs the product-measure criterion, and classifies by the fitted decay
    exponent of its terms (threshold: exponent 1, i.e. index gap 1/4).  The
    verdict is cross-checked against the analytic threshold; ``undecided`` is
    allowed only inside the +-``band`` exponent window around 1.
    """
    J, H = as_hurst(J), as_hurst(H)
    if not J < H:
        raise DomainError(f"need J < H, got J={J}, H={H}")
    if lam < 0:
        raise DomainError("the corruption amplitude must be nonnegative")
    analytic = "equivalent" if H - J > 0.25 else "singular"
    if lam == 0.0:
        return LawReport("equivalent", 0.0, {"analytic_verdict": "equivalent", "lambda": 0.0})
    aJ = coeff_table(J, N=N).a
    n = np.arange(1, N + 1)
    aH = (math.pi * n) ** (-(H + 0.5))
    pair = VarSeqPair(aJ**2, aJ**2 + lam**2 * aH**2)
    base = kakutani(pair)
    p_hat = base.diagnostics["term_decay_exponent"]
    if p_hat > 1.0 + band:
        verdict = "equivalent"
    elif p_hat < 1.0 - band:
        verdict = "singular"
    else:
        verdict = "undecided"
    base.diagnostics.update(
        {
            "analytic_verdict": analytic,
            "expected_exponent": 4.0 * (H - J),
            "agrees_with_analytic": verdict == analytic or verdict == "undecided",
        }
    )
    return LawReport(verdict, base.statistic, base.diagnostics)


# ---------------------------------------------------------------------------
# Entropy surrogate and total variation
# ---------------------------------------------------------------------------


def entropy_bound(x: SampledPath, H, T: float) -> float:
    """Norm surrogate T^(1-H) sup|D1 f| + T^(2-H) sup|D2 f| from finite differences.

    An upper bound up to the suppressed constants of the underlying embedding;
    only scaling exponents should ever be asserted, never absolute values.
    Squaring and halving turns it into a relative-entropy surrogate.
    """
    H = as_hurst(H)
    if T <= 0:
        raise DomainError(f"need T > 0, got {T}")
    if len(x) < 3:
        raise DomainError("at least 3 points are needed for second differences")
    t, v = x.times, x.values
    d1 = np.diff(v) / np.diff(t)
    h0, h1 = np.diff(t)[:-1], np.diff(t)[1:]
    d2 = 2.0 * (d1[1:] - d1[:-1]) / (h0 + h1)
    return T ** (1.0 - H) * float(np.max(np.abs(d1))) + T ** (2.0 - H) * float(np.max(np.abs(d2)))


def pinsker_tv(entropy: float) -> float:
    """Total-variation upper bound sqrt(2 * relative entropy)."""
    if entropy < 0:
        raise DomainError(f"relative entropy must be nonnegative, got {entropy}")
    return math.sqrt(2.0 * entropy)


# ---------------------------------------------------------------------------
# Single-path ergodic covariance recovery
# ---------------------------------------------------------------------------


def _pow_primitive(lo, hi, p):
    if p == -1.0:
        return np.log(hi) - np.log(lo)
    return (hi ** (p + 1.0) - lo ** (p + 1.0)) / (p + 1.0)


def ergodic_cov(x: SampledPath, H, u: float, v: float, t_min: float) -> float:
    """(1/|log t_min|) int_{t_min}^1 x(us) x(vs) s^(-2H-1) ds on the interpolant.

    Recovers E[X_u X_v] from a single path as t_min -> 0; needs the path
    sampled (log-refined) down to t_min * min(u, v).
    """
    H = as_hurst(H)
    if not (0.0 < u <= 1.0 and 0.0 < v <= 1.0):
        raise DomainError("evaluation points must lie in (0, 1]")
    if not 0.0 < t_min < 1.0:
        raise DomainError(f"t_min must lie in (0, 1), got {t_min}")
    lo_needed = t_min * min(u, v)
    if x.times[0] > lo_needed * (1 + 1e-12) or x.times[-1] < max(u, v) * (1 - 1e-12):
        raise DomainError(
            f"grid [{x.times[0]}, {x.times[-1]}] does not cover [{lo_needed}, {max(u, v)}]"
        )
    # union grid in s where both interpolants are simultaneously linear
    s_grid = np.concatenate((x.times / u, x.times / v, [t_min, 1.0]))
    s_grid = np.unique(s_grid[(s_grid >= t_min) & (s_grid <= 1.0)])
    xu = x.interp(u * s_grid)
    xv = x.interp(v * s_grid)
    lo, hi = s_grid[:-1], s_grid[1:]
    bu = np.diff(xu) / (hi - lo)
    au = xu[:-1] - bu * lo
    bv = np.diff(xv) / (hi - lo)
    av = xv[:-1] - bv * lo
    total = float(
        np.sum(
            au * av * _pow_primitive(lo, hi, -2.0 * H - 1.0)
            + (au * bv + av * bu) * _pow_primitive(lo, hi, -2.0 * H)
            + bu * bv * _pow_primitive(lo, hi, 1.0 - 2.0 * H)
        )
    )
    return total / abs(math.log(t_min))


# ---------------------------------------------------------------------------
# Monte Carlo scaling diagnostics backing the verdict table
# ---------------------------------------------------------------------------


def rl_entropy_scaling(H, S_values=(8.0, 16.0, 32.0, 64.0, 128.0), M: int = 400,
                       seed: int = 0, n_eval: int = 33) -> dict:
    """Fitted decay exponent of the entropy surrogate of windowed differences.

    The smooth difference between the fractional primitive and the exact
    process, windowed at offset S over a unit span, carries an entropy
    surrogate (squared, halved norm bound) decaying like S^(2H-2).
    """
    from .genpath import GeneratorConfig, _draw_matrix, _left_tail_cells, _mvn_weights

    H = as_hurst(H)
    S_values = np.asarray(S_values, dtype=float)
    cfg = GeneratorConfig(H=H, n=16, T=float(np.max(S_values)) + 1.0, seed=seed)
    edges = _left_tail_cells(cfg, span=1.0)
    widths = np.sqrt(np.diff(edges))
    eval_times = np.concatenate([S + np.linspace(0.0, 1.0, n_eval) for S in S_values])
    w = _mvn_weights(eval_times, edges, H)
    h = 1.0 / (n_eval - 1)
    sums = np.zeros(S_values.size)
    for m0 in range(0, M, 200):
        z = _draw_matrix(seed, m0, min(m0 + 200, M), widths.size)
        y = (z * widths) @ w.T
        for i in range(S_values.size):
            seg = y[:, i * n_eval : (i + 1) * n_eval]
            d1 = np.max(np.abs(np.diff(seg, axis=1) / h), axis=1)
            d2 = np.max(np.abs(np.diff(seg, 2, axis=1) / h**2), axis=1)
            sums[i] += np.sum((d1 + d2) ** 2 / 2.0)
    entropy = sums / M
    slope = float(np.polyfit(np.log(S_values), np.log(entropy), 1)[0])
    return {"S_values": S_values, "entropy_surrogate": entropy, "slope": slope,
            "expected_slope": 2.0 * H - 2.0}


def small_time_tv_scaling(H, eps_values=(0.06, 0.03, 0.015, 0.0075), M: int = 60,
                          seed: int = 0, n: int = 4096) -> dict:
    """Fitted decay exponent of the total-variation bound at shrinking windows.

    Uses the smooth coupled difference of the periodic variant at offset 1/2;
    the TV bound should shrink like eps^(1-H).
    """
    from .genpath import GeneratorConfig, coupled_batch

    H = as_hurst(H)
    eps_values = np.asarray(eps_values, dtype=float)
    tv_sums = np.zeros(eps_values.size)
    for cp in coupled_batch(GeneratorConfig(H=H, n=n, seed=seed, sim_subdiv=1), M):
        d = cp.diff_bhat
        for i, e in enumerate(eps_values):
            sel = (d.times >= 0.5) & (d.times <= 0.5 + e)
            w = SampledPath(d.times[sel], d.values[sel] - d.values[sel][0])
            tv_sums[i] += pinsker_tv(entropy_bound(w, H, float(e)) ** 2 / 2.0)
    tv = tv_sums / M
    slope = float(np.polyfit(np.log(eps_values), np.log(tv), 1)[0])
    return {"eps_values": eps_values, "tv_bound": tv, "slope": slope,
            "expected_slope": 1.0 - H}


def periodic_coefficient_check(H, N: int = 2048) -> LawReport:
    """Product-measure comparison of the exact coefficients with the pure
    (pi n)^(-H-1/2) scale: the term decay n^(4H-6) is always summable, so the
    two coefficient laws are equivalent on the unit interval."""
    H = as_hurst(H)
    ct = coeff_table(H, N=N)
    n = np.arange(1, N + 1)
    pair = VarSeqPair(ct.a**2, (math.pi * n) ** (-2.0 * H - 1.0))
    rep = kakutani(pair)
    rep.diagnostics["expected_exponent"] = 6.0 - 4.0 * H
    return rep


# ---------------------------------------------------------------------------
# Verdict table
# ---------------------------------------------------------------------------


def equivalence_table(scenario: str, H, *, S: float | None = None, T: float | None = None,
                      eps: float | None = None) -> LawReport:
    """Analytic verdicts for the standard comparison scenarios.

    Numeric consistency evidence (scaling fits, coefficient checks) is
    produced separately by the diagnostic helpers in this module and the
    experiment layer; this table only encodes the proved statements:

    - rl_vs_fbm(S): windowed fractional-primitive increments vs the exact
      process: equivalent for S > 0 (entropies decay like S^(2H-2)),
      mutually singular at S = 0 unless H = 1/2.
    - bhat_vs_fbm(T) / bbar_vs_fbm(T): periodic-expansion processes on [0,T]:
      equivalent for T < 1, singular at T >= 1, identical at H = 1/2.
    - small_time(eps): rescaled periodic process vs the exact one: total
      variation O(eps^(1-H)).
    """
    H = as_hurst(H)
    if scenario == "rl_vs_fbm":
        if S is None or S < 0:
            raise DomainError("rl_vs_fbm needs S >= 0")
        if S == 0:
            verdict = "equivalent" if H == 0.5 else "singular"
        else:
            verdict = "equivalent"
        return LawReport(verdict, float(S), {"scenario": scenario, "entropy_rate_exponent": 2 * H - 2})
    if scenario in ("bhat_vs_fbm", "bbar_vs_fbm"):
        if T is None or T <= 0:
            raise DomainError(f"{scenario} needs T > 0")
        if H == 0.5:
            verdict = "equivalent"
        else:
            verdict = "equivalent" if T < 1.0 else "singular"
        return LawReport(verdict, float(T), {"scenario": scenario})
    if scenario == "small_time":
        if eps is None or not 0 < eps <= 1:
            raise DomainError("small_time needs eps in (0, 1]")
        return LawReport("equivalent", float(eps),
                         {"scenario": scenario, "tv_rate_exponent": 1.0 - H})
    raise DomainError(f"unknown scenario {scenario!r}")
