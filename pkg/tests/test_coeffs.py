import math

import numpy as np
import pytest
from scipy.integrate import quad

from fbmlab.coeffs import (
    asymptotic_check,
    b_n,
    coeff_table,
    default_a0,
    f_h_partial,
    feasibility_boundary,
    tail_bound,
)
from fbmlab.errors import DomainError, FeasibilityError, NumericsError
from fbmlab.special import rho_of_h

# b_1 at H = 0.3 with a0 = sqrt(2 rho H), frozen from the brute-force
# adaptive-quadrature oracle below (agreement at 1e-15 when recomputed)
B1_03_WIDE_A0 = 0.07289166148044723


def b_oracle(H, a0, n):
    """Independent route: adaptive quadrature of the defining Fourier integral."""
    rho = rho_of_h(H)
    v1, _ = quad(lambda t: t ** (2 * H) * math.cos(math.pi * n * t), 0, 1,
                 limit=800, epsabs=1e-14, epsrel=1e-13)
    v2, _ = quad(lambda t: t**2 * math.cos(math.pi * n * t), 0, 1,
                 limit=800, epsabs=1e-14, epsrel=1e-13)
    return -rho * v1 + a0**2 * v2


def test_half_brownian_coefficients_exact():
    a0 = default_a0(0.5)
    assert a0**2 == pytest.approx(0.5, abs=1e-15)
    for n in range(1, 1025):
        assert abs(b_n(0.5, a0, n) - 1.0 / (math.pi * n) ** 2) < 1e-16


def test_b1_frozen_oracle_value():
    a0 = math.sqrt(2 * rho_of_h(0.3) * 0.3)
    assert b_n(0.3, a0, 1) == pytest.approx(B1_03_WIDE_A0, abs=1e-12)
    assert b_oracle(0.3, a0, 1) == pytest.approx(B1_03_WIDE_A0, abs=1e-10)


@pytest.mark.parametrize("H", [0.3, 0.7])
@pytest.mark.parametrize("n", [1, 2, 7, 64])
def test_b_n_matches_adaptive_quadrature(H, n):
    a0 = default_a0(H)
    assert b_n(H, a0, n) == pytest.approx(b_oracle(H, a0, n), rel=1e-9, abs=1e-14)


def test_b_n_domain():
    with pytest.raises(DomainError):
        b_n(0.3, -0.1, 1)
    with pytest.raises(DomainError):
        b_n(0.3, 0.5, 0)
    with pytest.raises(DomainError):
        b_n(1.2, 0.5, 1)


@pytest.mark.parametrize("H", [0.3, 0.7])
def test_default_a0_gives_positive_table(H):
    ct = coeff_table(H, N=1024)
    assert np.all(ct.b > 0)
    assert np.allclose(ct.a, np.sqrt(ct.b))


def test_torus_case_feasible_for_small_H():
    # a0 = 0 stays feasible below 1/2 (the torus-indexed process exists there)
    ct = coeff_table(0.3, a0=0.0, N=512)
    assert np.all(ct.b >= 0)


def test_wrong_a0_detected_above_half():
    # above H = 1/2 only a0 = sqrt(rho H) works; anything else flips signs
    with pytest.raises(FeasibilityError) as ei:
        coeff_table(0.7, a0=0.8 * default_a0(0.7), N=256)
    assert ei.value.n is not None and ei.value.n >= 1


def test_a0_zero_infeasible_above_half():
    with pytest.raises(FeasibilityError):
        coeff_table(0.7, a0=0.0, N=64)


def test_asymptotic_slopes():
    for H in (0.3, 0.7):
        rep = asymptotic_check(coeff_table(H, N=1024))
        assert abs(rep.slope - (2 * H - 3.0)) < 0.3


def test_asymptotic_exact_at_half():
    rep = asymptotic_check(coeff_table(0.5, N=256))
    assert rep.exact


def test_asymptotic_check_raises_on_wrong_decay():
    ct = coeff_table(0.3, N=512)
    tampered = type(ct)(H=ct.H, a0=ct.a0, b=ct.b, a=ct.a * (1 + 0.1 / np.sqrt(np.arange(1, 513))), N=ct.N)
    with pytest.raises(NumericsError):
        asymptotic_check(tampered)


def test_parseval_profile_within_tail_bound():
    for H in (0.3, 0.7):
        ct = coeff_table(H, N=1024)
        t = np.linspace(0.0, 1.0, 17)
        diff = np.max(np.abs(f_h_partial(ct, t) - rho_of_h(H) * t ** (2 * H)))
        assert diff < tail_bound(ct)


def test_feasibility_boundary_bisection():
    H = 0.3
    res = feasibility_boundary(H, N_max=512, tol=1e-5)
    lo = math.sqrt(2 * rho_of_h(H) * H)
    assert res["a_boundary"] >= lo - 1e-12
    # just above the boundary the table must fail, with the violating n reported
    with pytest.raises(FeasibilityError) as ei:
        coeff_table(H, a0=res["a_boundary"] + 1e-3, N=512)
    assert ei.value.n is not None


def test_feasibility_boundary_rejected_above_half():
    with pytest.raises(DomainError):
        feasibility_boundary(0.7)
