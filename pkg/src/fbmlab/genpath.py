"""Path generators on a uniform grid, sharing driving noise where couplings demand it.

All kernel-driven generators use cell-averaged kernels against independent
cell increments of the driving noise (never midpoint evaluation), so the
discretisation bias of second moments stays at interpolation order uniformly
in H, including near the (t-s)^(H-1/2) singularity.  Replicate paths use a
counter-based generator keyed per path, so ensembles are reproducible and
embarrassingly parallel.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import coeff_table
from .errors import DomainError, NumericsError
from .fracops import SampledPath, seg_mean_plus_pow
from .kernels import KernelSpec, cell_averaged_weights
from .special import as_hurst, gamma_fn, kappa_of_h, rho_of_h

__all__ = [
    "GeneratorConfig",
    "PathEnsemble",
    "GENERATOR_IDS",
    "fbm_cov",
    "cov_z_scores",
    "generate",
    "gen_cholesky",
    "gen_mvn",
    "gen_mg",
    "gen_rl",
    "gen_series",
    "coupled_gen",
    "coupled_batch",
    "coupling_increment_sup_l2",
    "stationary_a",
    "rl_variance",
    "apply_t_hl_ensemble",
    "apply_time_invert_ensemble",
]

GENERATOR_IDS = ("cholesky", "mvn", "mg", "rl", "bhat", "bbar", "exact_trig", "kl", "stationary_a")

_CHUNK = 2000  # path-chunk size capping transient normal draws


@dataclass(frozen=True)
class GeneratorConfig:
    """Grid, seed and truncation settings shared by every generator."""

    H: float
    n: int
    T: float = 1.0
    seed: int = 0
    n_terms: int = 512
    trunc_factor: float = 100.0
    sim_subdiv: int = 32

    def __post_init__(self):
        as_hurst(self.H, fbm_range=False)
        if self.n < 2:
            raise DomainError(f"need n >= 2 grid steps, got {self.n}")
        if self.T <= 0:
            raise DomainError(f"need T > 0, got {self.T}")
        if self.n_terms < 1:
            raise DomainError(f"need n_terms >= 1, got {self.n_terms}")
        if self.trunc_factor < 10:
            raise DomainError(f"trunc_factor below 10 is not supported, got {self.trunc_factor}")
        if self.sim_subdiv < 1:
            raise DomainError(f"sim_subdiv must be >= 1, got {self.sim_subdiv}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n + 1)


@dataclass
class PathEnsemble:
    """M paths on the config grid; paths[:, 0] is the t = 0 value (0 except A)."""

    config: GeneratorConfig
    generator_id: str
    times: np.ndarray
    paths: np.ndarray
    seeds: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return self.paths.shape[0]

    def path(self, k: int) -> SampledPath:
        return SampledPath(self.times, self.paths[k])

    def empirical_cov(self) -> np.ndarray:
        """Second-moment matrix over the positive grid times (t = 0 excluded)."""
        x = self.paths[:, 1:]
        return x.T @ x / self.M


def _path_rng(seed: int, k: int) -> np.random.Generator:
    """Counter-based generator for path k, derived by keying on (seed, k)."""
    return np.random.Generator(np.random.Philox(key=np.random.SeedSequence((seed, k)).generate_state(1, np.uint64)[0]))


def _draw_matrix(seed: int, m0: int, m1: int, ncols: int) -> np.ndarray:
    """Standard normals for paths m0..m1-1, one row per path."""
    out = np.empty((m1 - m0, ncols))
    for k in range(m0, m1):
        out[k - m0] = _path_rng(seed, k).standard_normal(ncols)
    return out


# ---------------------------------------------------------------------------
# Covariance targets and diagnostics
# ---------------------------------------------------------------------------


def fbm_cov(times, H) -> np.ndarray:
    """Covariance rho/2 (|s|^2H + |t|^2H - |t-s|^2H) on the given times."""
    H = as_hurst(H)
    rho = rho_of_h(H)
    t = np.asarray(times, dtype=float)
    s, u = np.meshgrid(t, t, indexing="ij")
    return 0.5 * rho * (np.abs(s) ** (2 * H) + np.abs(u) ** (2 * H) - np.abs(s - u) ** (2 * H))


def cov_z_scores(emp: np.ndarray, target: np.ndarray, M: int) -> np.ndarray:
    """Standardised deviations of an empirical second-moment matrix.

    Var of the (i,j) entry of the mean of M outer products of a centred
    Gaussian vector is (C_ii C_jj + C_ij^2) / M.
    """
    d = np.sqrt(np.clip(np.diag(target), 0.0, None))
    se = np.sqrt((np.outer(d**2, d**2) + target**2) / M)
    return (emp - target) / se


# ---------------------------------------------------------------------------
# Cell machinery
# ---------------------------------------------------------------------------


def _positive_cells(cfg: GeneratorConfig) -> np.ndarray:
    """Uniform cell edges on [0, T], sim_subdiv cells per grid step."""
    return np.linspace(0.0, cfg.T, cfg.n * cfg.sim_subdiv + 1)


def _left_tail_cells(cfg: GeneratorConfig, span: float | None = None) -> np.ndarray:
    """Cell edges on [-trunc*T, 0]: uniform on [-span, 0], geometric beyond."""
    h = cfg.T / (cfg.n * cfg.sim_subdiv)
    span = cfg.T if span is None else span
    uniform = np.linspace(-span, 0.0, int(round(span / h)) + 1)
    deep = cfg.trunc_factor * cfg.T
    n_geo = max(int(math.ceil(math.log(deep / span) / math.log(1.15))), 2)
    geo = -np.geomspace(deep, span, n_geo + 1)[:-1]
    return np.concatenate((geo, uniform))


def _mvn_weights(eval_times, edges, H) -> np.ndarray:
    """Cell averages of kappa * ((t-s)_+^(H-1/2) - (-s)_+^(H-1/2))."""
    p = H - 0.5
    kappa = kappa_of_h(H)
    lo, hi = edges[:-1], edges[1:]
    moving = seg_mean_plus_pow(eval_times, lo, hi, p)
    anchor = seg_mean_plus_pow(np.array([0.0]), lo, hi, p)[0]
    return kappa * (moving - anchor)


def _apply_cell_weights(cfg, M, weights, edges, generator_id, diagnostics=None):
    """Accumulate paths = (Z * sqrt(cell widths)) @ weights^T in path chunks."""
    widths = np.sqrt(np.diff(edges))
    n_out = weights.shape[0]
    paths = np.empty((M, n_out + 1))
    paths[:, 0] = 0.0
    wT = (weights * np.diff(edges)[None, :] ** 0.5).T  # fold sqrt(width) into weights
    for m0 in range(0, M, _CHUNK):
        m1 = min(m0 + _CHUNK, M)
        z = _draw_matrix(cfg.seed, m0, m1, widths.size)
        paths[m0:m1, 1:] = z @ wT
    return PathEnsemble(
        config=cfg,
        generator_id=generator_id,
        times=cfg.times,
        paths=paths,
        seeds=np.arange(M, dtype=np.int64),
        diagnostics=diagnostics or {},
    )


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def gen_cholesky(cfg: GeneratorConfig, M: int) -> PathEnsemble:
    """Exact sampling through a Cholesky factor of the covariance matrix.

    This is the distributional reference for every other generator.
    """
    as_hurst(cfg.H)
    t = cfg.times[1:]
    C = fbm_cov(t, cfg.H)
    jitter = 0.0
    try:
        L = np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * rho_of_h(cfg.H) * cfg.T ** (2 * cfg.H)
        try:
            L = np.linalg.cholesky(C + jitter * np.eye(C.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise NumericsError("covariance factorisation failed even with jitter") from exc
    paths = np.empty((M, cfg.n + 1))
    paths[:, 0] = 0.0
    for m0 in range(0, M, _CHUNK):
        m1 = min(m0 + _CHUNK, M)
        z = _draw_matrix(cfg.seed, m0, m1, cfg.n)
        paths[m0:m1, 1:] = z @ L.T
    return PathEnsemble(cfg, "cholesky", cfg.times, paths, np.arange(M, dtype=np.int64),
                        {"jitter": jitter})


def gen_mvn(cfg: GeneratorConfig, M: int) -> PathEnsemble:
    """Whole-line moving-average discretisation with a truncated left tail."""
    as_hurst(cfg.H)
    edges = np.concatenate((_left_tail_cells(cfg), _positive_cells(cfg)[1:]))
    w = _mvn_weights(cfg.times[1:], edges, cfg.H)
    # neglected left-tail variance: kernel increment ~ (H-1/2) t (-s)^(H-3/2)
    A = cfg.trunc_factor * cfg.T
    bias = (cfg.H - 0.5) ** 2 * cfg.T**2 * kappa_of_h(cfg.H) ** 2 * A ** (2 * cfg.H - 2.0) / (
        2.0 - 2.0 * cfg.H
    )
    return _apply_cell_weights(cfg, M, w, edges, "mvn", {"tail_variance_bound": bias})


def gen_mg(cfg: GeneratorConfig, M: int) -> PathEnsemble:
    """Volterra simulation with the canonical kernel on [0, T]."""
    as_hurst(cfg.H)
    edges = _positive_cells(cfg)
    if cfg.H == 0.5:
        w = seg_mean_plus_pow(cfg.times[1:], edges[:-1], edges[1:], 0.0)
    else:
        w = cell_averaged_weights(cfg.times[1:], edges, KernelSpec(0.5, cfg.H))
    return _apply_cell_weights(cfg, M, w, edges, "mg")


def gen_rl(cfg: GeneratorConfig, M: int) -> PathEnsemble:
    """Fractional primitive of the driving noise; valid for any H > 0."""
    as_hurst(cfg.H, fbm_range=False)
    edges = _positive_cells(cfg)
    p = cfg.H - 0.5
    w = seg_mean_plus_pow(cfg.times[1:], edges[:-1], edges[1:], p) / gamma_fn(cfg.H + 0.5)
    return _apply_cell_weights(cfg, M, w, edges, "rl")


def rl_variance(times, H) -> np.ndarray:
    """Closed-form Var = t^(2H) / (2H Gamma(H+1/2)^2) of the fractional primitive."""
    t = np.asarray(times, dtype=float)
    return t ** (2 * H) / (2 * H * gamma_fn(H + 0.5) ** 2)


def _series_setup(cfg: GeneratorConfig, kind: str):
    t = cfg.times
    if kind in ("bhat", "bbar", "kl") and cfg.T != 1.0:
        raise DomainError("series generators are defined on the unit interval")
    N = cfg.n_terms
    if kind == "bhat":
        as_hurst(cfg.H, fbm_range=False)
        r = 2.0 * math.pi * np.arange(1, N + 1)
        amp = math.sqrt(2.0) * r ** (-(cfg.H + 0.5))
        return amp, amp, r, 1.0
    if kind == "bbar":
        as_hurst(cfg.H, fbm_range=False)
        r = math.pi * (2.0 * np.arange(N) + 1.0)
        amp = math.sqrt(2.0) * r ** (-(cfg.H + 0.5))
        return amp, amp, r, None
    if kind == "exact_trig":
        ct = coeff_table(cfg.H, N=N)  # default a0 = sqrt(rho H)
        r = math.pi * np.arange(1, N + 1)
        return ct.a, ct.a, r, ct.a0
    if kind == "kl":
        as_hurst(cfg.H, fbm_range=False)
        r = math.pi * (np.arange(N) + 0.5)
        amp = math.sqrt(2.0) * r ** (-(cfg.H + 0.5))
        return None, amp, r, None
    raise DomainError(f"unknown series kind {kind!r}")


def gen_series(cfg: GeneratorConfig, M: int, kind: str = "exact_trig") -> PathEnsemble:
    """Truncated trigonometric series with independent Gaussian coefficients."""
    cos_amp, sin_amp, r, drift = _series_setup(cfg, kind)
    t = cfg.times
    phase = r[:, None] * t[None, :]
    sin_basis = np.sin(phase)
    cos_basis = np.cos(phase) - 1.0 if cos_amp is not None else None
    N = r.size
    n_normals = (1 if drift is not None else 0) + (N if cos_amp is not None else 0) + N
    paths = np.empty((M, t.size))
    for m0 in range(0, M, _CHUNK):
        m1 = min(m0 + _CHUNK, M)
        z = _draw_matrix(cfg.seed, m0, m1, n_normals)
        pos = 0
        acc = np.zeros((m1 - m0, t.size))
        if drift is not None:
            acc += drift * z[:, [0]] * t[None, :]
            pos = 1
        if cos_amp is not None:
            acc += (z[:, pos : pos + N] * cos_amp) @ cos_basis
            pos += N
        acc += (z[:, pos : pos + N] * sin_amp) @ sin_basis
        paths[m0:m1] = acc
    return PathEnsemble(cfg, kind, t, paths, np.arange(M, dtype=np.int64),
                        {"n_terms": N})


def generate(cfg: GeneratorConfig, M: int, generator_id: str) -> PathEnsemble:
    """Dispatch by generator name (see GENERATOR_IDS)."""
    if generator_id == "cholesky":
        return gen_cholesky(cfg, M)
    if generator_id == "mvn":
        return gen_mvn(cfg, M)
    if generator_id == "mg":
        return gen_mg(cfg, M)
    if generator_id == "rl":
        return gen_rl(cfg, M)
    if generator_id in ("bhat", "bbar", "exact_trig", "kl"):
        return gen_series(cfg, M, kind=generator_id)
    if generator_id == "stationary_a":
        return stationary_a(cfg, M)[1]
    raise DomainError(f"unknown generator {generator_id!r}")


# ---------------------------------------------------------------------------
# Couplings
# ---------------------------------------------------------------------------


@dataclass
class CoupledPaths:
    """One realisation of the four coupled paths, driven by a single noise."""

    b: SampledPath
    x: SampledPath
    bhat: SampledPath
    bbar: SampledPath

    @property
    def diff_x(self) -> SampledPath:
        return SampledPath(self.b.times, self.x.values - self.b.values)

    @property
    def diff_bhat(self) -> SampledPath:
        return SampledPath(self.b.times, self.bhat.values - self.b.values)

    @property
    def diff_bbar(self) -> SampledPath:
        return SampledPath(self.b.times, self.bbar.values - self.b.values)


def _reflected_tail_cells(cfg: GeneratorConfig):
    """Cells on [0, inf) for the reflected-noise integrals: dense then geometric.

    The kernel is smooth away from 0, so the density is capped; it only
    discretises the reflected noise, not a singular kernel.
    """
    h = cfg.T / min(cfg.n, 512)
    uniform = np.arange(0.0, 4.0 * cfg.T + h / 2, h)
    deep = cfg.trunc_factor * cfg.T
    n_geo = max(int(math.ceil(math.log(deep / uniform[-1]) / math.log(1.2))), 2)
    geo = np.geomspace(uniform[-1], deep, n_geo + 1)[1:]
    return np.concatenate((uniform, geo))


def _shifted_kernel_weights(eval_times, edges, alpha):
    """Cell means of -((t+s)^alpha - s^alpha)/Gamma(alpha+1) over s-cells."""
    from .fracops import _seg_mean_shift_minus

    lo, hi = edges[:-1], edges[1:]
    moving = _seg_mean_shift_minus(-np.asarray(eval_times, dtype=float), lo, hi, alpha)
    anchor = _seg_mean_shift_minus(np.array([0.0]), lo, hi, alpha)[0]
    return -(moving - anchor) / gamma_fn(alpha + 1.0)


class _CoupledWeights:
    """Precomputed weight matrices for the coupled construction on [0, 1]."""

    def __init__(self, cfg: GeneratorConfig):
        as_hurst(cfg.H)
        if cfg.T != 1.0:
            raise DomainError("the coupled construction is defined on the unit horizon")
        self.cfg = cfg
        self.alpha = cfg.H - 0.5
        self.edges_neg = _left_tail_cells(cfg)
        self.edges_pos = _positive_cells(cfg)
        t_eval = cfg.times[1:]
        self.x_w = seg_mean_plus_pow(t_eval, self.edges_pos[:-1], self.edges_pos[1:], self.alpha) / gamma_fn(
            cfg.H + 0.5
        )
        self.y_w = _mvn_weights(t_eval, self.edges_neg, cfg.H)
        if self.alpha != 0.0:
            self.tail_edges = _reflected_tail_cells(cfg)
            self.shift_w = _shifted_kernel_weights(t_eval, self.tail_edges, self.alpha)
            self.drift_shape = t_eval - t_eval ** (cfg.H + 0.5) / gamma_fn(cfg.H + 1.5)

    def one(self, path_index: int) -> CoupledPaths:
        cfg = self.cfg
        rng = _path_rng(cfg.seed, path_index)
        dw_neg = rng.standard_normal(self.edges_neg.size - 1) * np.sqrt(np.diff(self.edges_neg))
        dw_pos = rng.standard_normal(self.edges_pos.size - 1) * np.sqrt(np.diff(self.edges_pos))
        x_vals = np.concatenate(([0.0], self.x_w @ dw_pos))
        b_vals = x_vals + np.concatenate(([0.0], self.y_w @ dw_neg))
        times = cfg.times
        if self.alpha == 0.0:
            w_vals = np.concatenate(([0.0], np.cumsum(dw_pos)))[:: cfg.sim_subdiv]
            return CoupledPaths(*(SampledPath(times, v) for v in (b_vals, x_vals, w_vals, w_vals)))

        fine_t = self.edges_pos
        w_fine = np.concatenate(([0.0], np.cumsum(dw_pos)))
        w1 = float(w_fine[-1])

        def periodic_bridge(s):  # W(x) - W(1) x on [0,1], extended 1-periodically
            x = np.mod(s, 1.0)
            return np.interp(x, fine_t, w_fine) - w1 * x

        def antiperiodic(s):  # increments flip across unit steps; 2-periodic
            y = np.mod(s, 2.0)
            base = np.interp(np.where(y <= 1.0, y, y - 1.0), fine_t, w_fine)
            return np.where(y <= 1.0, base, w1 - base)

        dw2 = np.diff(periodic_bridge(-self.tail_edges))
        dw4 = np.diff(antiperiodic(-self.tail_edges))
        bhat_vals = np.concatenate(([0.0], x_vals[1:] + w1 * self.drift_shape + self.shift_w @ dw2))
        bbar_vals = np.concatenate(([0.0], x_vals[1:] + self.shift_w @ dw4))
        return CoupledPaths(
            b=SampledPath(times, b_vals),
            x=SampledPath(times, x_vals),
            bhat=SampledPath(times, bhat_vals),
            bbar=SampledPath(times, bbar_vals),
        )


def coupled_gen(cfg: GeneratorConfig, path_index: int = 0) -> CoupledPaths:
    """All four variants driven by one noise realisation (unit horizon).

    The moving-average path splits as X plus the left-tail integral, and the
    periodic variants split as X plus smooth reflected-noise integrals (plus a
    drift correction for the hat variant), so every pairwise difference is a
    smooth kernel integral with no roughness left in it.  For many replicates
    build ``_CoupledWeights`` once via :func:`coupled_batch`.
    """
    return _CoupledWeights(cfg).one(path_index)


def coupled_batch(cfg: GeneratorConfig, M: int, path_offset: int = 0):
    """Yield M coupled realisations reusing one set of weight matrices."""
    weights = _CoupledWeights(cfg)
    for k in range(path_offset, path_offset + M):
        yield weights.one(k)


def coupling_increment_sup_l2(H, S_values, T=1.0, M=2000, seed=0, n_eval=17,
                              trunc_factor=100.0, sim_subdiv=32):
    """L2(Omega) norm of sup_t |(X-B) increments| over windows [S, S+T].

    The X difference equals the left-tail integral, so only the left-tail
    noise is needed; vectorised over replicates.
    """
    as_hurst(H)
    S_values = np.asarray(S_values, dtype=float)
    horizon = float(np.max(S_values) + T)
    cfg = GeneratorConfig(H=H, n=max(int(horizon * 8), 16), T=horizon, seed=seed,
                          trunc_factor=trunc_factor, sim_subdiv=sim_subdiv)
    edges = _left_tail_cells(cfg, span=1.0)
    widths = np.sqrt(np.diff(edges))
    eval_times = np.unique(np.concatenate([S + np.linspace(0.0, T, n_eval) for S in S_values]))
    w = _mvn_weights(eval_times, edges, H)
    sup_sq = np.zeros((len(S_values),))
    for m0 in range(0, M, _CHUNK):
        m1 = min(m0 + _CHUNK, M)
        z = _draw_matrix(cfg.seed, m0, m1, widths.size)
        y = (z * widths) @ w.T  # (chunk, eval_times)
        for i, S in enumerate(S_values):
            sel = (eval_times >= S - 1e-12) & (eval_times <= S + T + 1e-12)
            inc = y[:, sel] - y[:, sel][:, [0]]
            sup_sq[i] += np.sum(np.max(np.abs(inc), axis=1) ** 2)
    return np.sqrt(sup_sq / M)


def stationary_a(cfg: GeneratorConfig, M: int = 1):
    """Stationarising level A0 and the shifted paths A_t = B_t + A0.

    A0 = -rho H Gamma(H+1/2) * int_0^T t^(H-1/2) dW_t with the same noise that
    drives the canonical Volterra path.
    """
    as_hurst(cfg.H)
    edges = _positive_cells(cfg)
    lo, hi = edges[:-1], edges[1:]
    if cfg.H == 0.5:
        w_b = seg_mean_plus_pow(cfg.times[1:], lo, hi, 0.0)
    else:
        w_b = cell_averaged_weights(cfg.times[1:], edges, KernelSpec(0.5, cfg.H))
    rho = rho_of_h(cfg.H)
    # int over each cell of t^(H-1/2) dt, exact
    cell_int = (hi ** (cfg.H + 0.5) - lo ** (cfg.H + 0.5)) / (cfg.H + 0.5)
    w_a0 = -rho * cfg.H * gamma_fn(cfg.H + 0.5) * cell_int / np.diff(edges)
    widths = np.sqrt(np.diff(edges))
    a0 = np.empty(M)
    paths = np.empty((M, cfg.n + 1))
    for m0 in range(0, M, _CHUNK):
        m1 = min(m0 + _CHUNK, M)
        z = _draw_matrix(cfg.seed, m0, m1, widths.size) * widths
        b = z @ w_b.T
        a0[m0:m1] = z @ w_a0
        paths[m0:m1, 0] = a0[m0:m1]
        paths[m0:m1, 1:] = b + a0[m0:m1, None]
    ens = PathEnsemble(cfg, "stationary_a", cfg.times, paths, np.arange(M, dtype=np.int64),
                       {"a0_variance": float((rho * cfg.H * gamma_fn(cfg.H + 0.5)) ** 2
                                             * cfg.T ** (2 * cfg.H) / (2 * cfg.H))})
    return a0, ens


# ---------------------------------------------------------------------------
# Vectorised law-preserving transforms of whole ensembles
# ---------------------------------------------------------------------------


def apply_t_hl_ensemble(times, paths, H, L) -> np.ndarray:
    """Row-wise t_hl on an (M, n+1) path matrix pinned at times[0] = 0."""
    t = np.asarray(times, dtype=float)
    if t[0] != 0.0:
        raise DomainError("ensemble filter needs a grid starting at 0")
    nu = L - H - 1.0
    lo, hi = t[1:-1], t[2:]
    h = np.diff(t)
    slope = np.diff(paths, axis=1) / h
    const = paths[:, 1:-1] - slope[:, 1:] * lo
    p1 = (hi ** (nu + 1.0) - lo ** (nu + 1.0)) / (nu + 1.0) if nu != -1.0 else np.log(hi / lo)
    p2 = (hi ** (nu + 2.0) - lo ** (nu + 2.0)) / (nu + 2.0)
    seg = np.empty_like(slope)
    seg[:, 0] = slope[:, 0] * t[1] ** (nu + 2.0) / (nu + 2.0)
    seg[:, 1:] = const * p1 + slope[:, 1:] * p2
    integral = np.cumsum(seg, axis=1)
    out = np.empty_like(paths)
    out[:, 0] = 0.0
    out[:, 1:] = paths[:, 1:] - 2.0 * L * t[1:] ** (H - L) * integral
    return out


def apply_time_invert_ensemble(times, paths, H):
    """Row-wise map t -> 1/t: returns (reciprocal times, u^(2H) * path(1/u))."""
    t = np.asarray(times, dtype=float)
    if t[0] <= 0.0:
        raise DomainError("time inversion needs strictly positive times")
    u = (1.0 / t)[::-1]
    return u, u ** (2.0 * H) * paths[:, ::-1]
