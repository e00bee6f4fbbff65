import numpy as np
import pytest
from scipy.integrate import quad

from fbmlab.errors import DomainError
from fbmlab.fracops import SampledPath, riemann_liouville
from fbmlab.kernels import KernelSpec, apply_g, cell_averaged_weights, k0plus, kplus_neg, phi_jh
from fbmlab.special import gamma_fn


def phi_oracle(u, J, H):
    """Brute-force adaptive quadrature of the regularised integral."""
    val, _ = quad(
        lambda v: (v ** (H + J - 1) - 1.0) * (v - 1.0) ** (H - J - 1),
        1.0, u, epsabs=1e-14, epsrel=1e-13, limit=500,
    )
    return (H - J) * val + (u - 1.0) ** (H - J)


def smooth_test_path(n=2048):
    t = np.linspace(0.0, 1.0, n + 1)
    return SampledPath(t, np.sin(np.pi * t) * t)


def test_spec_validation():
    with pytest.raises(DomainError):
        KernelSpec(0.0, 0.5)
    with pytest.raises(DomainError):
        KernelSpec(0.5, 1.0)


def test_phi_identity_when_indices_equal():
    spec = KernelSpec(0.6, 0.6)
    for u in (1.0001, 2.0, 50.0):
        assert phi_jh(u, spec) == 1.0


@pytest.mark.parametrize("u", [1.5, 2.0, 10.0])
def test_phi_power_form_when_indices_sum_to_one(u):
    spec = KernelSpec(0.3, 0.7)
    assert abs(phi_jh(u, spec) - (u - 1.0) ** 0.4) < 1e-9


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_phi_against_quadrature_oracle():
    spec = KernelSpec(0.5, 0.7)
    for u in (1.001, 1.2, 2.0, 10.0, 100.0):
        assert abs(phi_jh(u, spec) - phi_oracle(u, 0.5, 0.7)) < 1e-10
    # H < J: the integrand stays integrable in the regularised form
    spec = KernelSpec(0.7, 0.4)
    for u in (1.1, 2.0, 30.0):
        assert abs(phi_jh(u, spec) - phi_oracle(u, 0.7, 0.4)) < 1e-10


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_phi_array_route_matches_oracle():
    spec = KernelSpec(0.5, 0.7)
    uu = np.geomspace(1.01, 500.0, 11)
    vals = phi_jh(uu, spec)
    for u, v in zip(uu, vals):
        assert abs(v - phi_oracle(float(u), 0.5, 0.7)) < 1e-9


def test_phi_domain():
    with pytest.raises(DomainError):
        phi_jh(1.0, KernelSpec(0.5, 0.7))
    with pytest.raises(DomainError):
        phi_jh(0.5, KernelSpec(0.5, 0.7))


def test_phi_asymptotic_slopes():
    # near u = 1 the profile behaves like (u-1)^(H-1/2) for J = 1/2
    for H, expect in ((0.7, 0.2), (0.3, -0.2)):
        spec = KernelSpec(0.5, H)
        u = 1.0 + np.array([1e-4, 3e-4, 1e-3])
        v = np.array([phi_jh(float(x), spec) for x in u])
        slope = np.polyfit(np.log(u - 1.0), np.log(v), 1)[0]
        assert abs(slope - expect) < 0.02
    # for large u: growth exponent 2H-1 when H > 1/2, flat otherwise
    spec = KernelSpec(0.5, 0.7)
    u = np.array([1e3, 1e4, 1e5])
    v = np.array([phi_jh(float(x), spec) for x in u])
    slope = np.polyfit(np.log(u), np.log(v), 1)[0]
    assert abs(slope - 0.4) < 0.05
    spec = KernelSpec(0.5, 0.3)
    v = np.array([phi_jh(float(x), spec) for x in u])
    slope = np.polyfit(np.log(u), np.log(v), 1)[0]
    assert abs(slope) < 0.05


# ---------------------------------------------------------------------------
# Kernel point values
# ---------------------------------------------------------------------------


def test_k0_equal_indices_is_one():
    spec = KernelSpec(0.4, 0.4)
    for t, s in ((1.0, 0.5), (3.0, 0.1)):
        assert k0plus(t, s, spec) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("lam", [2.0, 5.0])
def test_k0_homogeneity(lam):
    spec = KernelSpec(0.5, 0.7)
    t, s = 2.0, 0.7
    assert k0plus(lam * t, lam * s, spec) == pytest.approx(
        lam ** spec.d * k0plus(t, s, spec), rel=1e-12
    )


def test_k0_value_via_phi_oracle():
    spec = KernelSpec(0.5, 0.7)
    assert k0plus(2.0, 1.0, spec) == pytest.approx(
        phi_oracle(2.0, 0.5, 0.7) / gamma_fn(1.2), rel=1e-10
    )


def test_k0_domain():
    spec = KernelSpec(0.5, 0.7)
    with pytest.raises(DomainError):
        k0plus(1.0, 1.0, spec)
    with pytest.raises(DomainError):
        k0plus(1.0, -0.5, spec)


def test_kplus_brownian_case():
    spec = KernelSpec(0.5, 0.5)
    assert kplus_neg(-1.0, -2.0, spec) == pytest.approx(0.5, abs=1e-14)  # |t|/|s|
    assert kplus_neg(-0.5, -4.0, spec) == pytest.approx(0.125, abs=1e-14)


def test_kplus_equal_indices_power_form():
    H = 0.7
    spec = KernelSpec(H, H)
    t, s = -1.0, -3.0
    assert kplus_neg(t, s, spec) == pytest.approx((-t) ** (2 * H) * (-s) ** (-2 * H), rel=1e-13)


def test_kplus_value_via_phi_oracle():
    spec = KernelSpec(0.5, 0.7)
    got = kplus_neg(-1.0, -2.0, spec)
    assert got == pytest.approx(phi_oracle(2.0, 0.5, 0.7) * 2.0 ** (-1.2) / gamma_fn(1.2), rel=1e-10)


def test_kplus_ordering_enforced():
    spec = KernelSpec(0.5, 0.7)
    with pytest.raises(DomainError):
        kplus_neg(-2.0, -1.0, spec)
    with pytest.raises(DomainError):
        kplus_neg(1.0, -2.0, spec)


# ---------------------------------------------------------------------------
# The transfer operator
# ---------------------------------------------------------------------------


def test_apply_g_identity():
    f = smooth_test_path(64)
    assert apply_g(f, KernelSpec(0.5, 0.5)) is f


def test_apply_g_reduces_to_fractional_integral_when_sum_is_one():
    f = smooth_test_path(512)
    lhs = apply_g(f, KernelSpec(0.3, 0.7)).values
    rhs = riemann_liouville(f, 0.4).values
    assert np.max(np.abs(lhs - rhs)) < 1e-13


def test_apply_g_composition():
    f = smooth_test_path(2048)
    lhs = apply_g(apply_g(f, KernelSpec(0.3, 0.6)), KernelSpec(0.6, 0.4)).values
    rhs = apply_g(f, KernelSpec(0.3, 0.4)).values
    assert np.max(np.abs(lhs - rhs)) < 1e-3


def test_apply_g_inverse_pair_refinement():
    errs = []
    for n in (512, 2048):
        f = smooth_test_path(n)
        back = apply_g(apply_g(f, KernelSpec(0.3, 0.6)), KernelSpec(0.6, 0.3))
        errs.append(np.max(np.abs(back.values - f.values)))
    assert errs[1] < errs[0] and errs[1] < 1e-4


@pytest.mark.parametrize("JH", [(0.5, 0.7), (0.6, 0.35)])
def test_apply_g_modes_agree(JH):
    f = smooth_test_path(256)
    spec = KernelSpec(*JH)
    m1 = apply_g(f, spec, mode="factorised").values
    m2 = apply_g(f, spec, mode="kernel_sum").values
    assert np.max(np.abs(m1 - m2)) < 1e-4


def test_apply_g_precondition():
    t = np.linspace(0.0, 1.0, 65)
    with pytest.raises(Exception):
        apply_g(SampledPath(t, t + 1.0), KernelSpec(0.3, 0.7))


def test_cell_averaged_weights_volterra_structure():
    # cells at or beyond the evaluation time carry zero weight
    spec = KernelSpec(0.5, 0.7)
    edges = np.linspace(0.0, 1.0, 9)
    w = cell_averaged_weights(edges[1:], edges, spec)
    assert np.allclose(np.triu(w, k=1), 0.0)
    assert np.all(np.diag(w) != 0.0)
