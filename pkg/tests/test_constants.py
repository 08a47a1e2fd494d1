"""Exponent derivations and critical constants.

Closed-form reference values (independent derivations, frozen here):
  s = 1/alpha = tau-1 in (1,2)
  A_nr  = int (1-e^-z) z^-s dz   = Gamma(2-s)/(s-1)        -> 2*sqrt(pi) at s=3/2
  A_cl  = int min(1,z) z^-s dz   = 1/(2-s) + 1/(s-1)       -> 4          at s=3/2
  A_grg = int z^{1-s}/(1+z) dz   = pi/sin(pi*(s-1))        -> pi         at s=3/2
"""

import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma as gamma_fn

from hubperc.constants import (
    ModelParams,
    a_alpha,
    a_alpha_gauss,
    derive_exponents,
    lambda_crit,
)


def closed_form_a(kernel, alpha):
    s = 1.0 / alpha
    if kernel == "nr":
        return gamma_fn(2.0 - s) / (s - 1.0)
    if kernel == "cl":
        return 1.0 / (2.0 - s) + 1.0 / (s - 1.0)
    return math.pi / math.sin(math.pi * (s - 1.0))


def test_exponents_tau_2_5():
    exps = derive_exponents(ModelParams(tau=2.5, tail_const_C=1.0, n=10))
    assert exps.alpha == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert exps.rho == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert exps.eta == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert exps.eta_s == pytest.approx(0.25, abs=1e-15)
    assert exps.beta == pytest.approx(1.25 / 3.0, abs=1e-12)
    assert exps.c_F == pytest.approx(1.0, abs=1e-15)
    assert exps.mu == pytest.approx(3.0, abs=1e-12)


def test_exponents_tau_2_2():
    exps = derive_exponents(ModelParams(tau=2.2, tail_const_C=1.0, n=10))
    assert exps.alpha == pytest.approx(1.0 / 1.2, rel=1e-12)
    assert exps.eta_s == pytest.approx(0.4, abs=1e-12)
    assert exps.beta == pytest.approx((2.2 ** 2 - 8.8 + 5) / 2.4, rel=1e-12)
    assert exps.beta == pytest.approx(0.4333333333, abs=1e-9)


def test_exponents_scale_constant():
    exps = derive_exponents(ModelParams(tau=2.5, tail_const_C=8.0, n=10))
    assert exps.c_F == pytest.approx(4.0, rel=1e-12)  # 8^{1/1.5}
    assert exps.mu == pytest.approx(12.0, rel=1e-12)
    assert exps.mu * (1.0 - exps.alpha) == pytest.approx(exps.c_F, rel=1e-12)


def test_tau_out_of_range_rejected():
    with pytest.raises(ValueError):
        ModelParams(tau=3.1, tail_const_C=1.0, n=10)
    with pytest.raises(ValueError):
        ModelParams(tau=2.0, tail_const_C=1.0, n=10)
    with pytest.raises(ValueError):
        ModelParams(tau=2.5, tail_const_C=0.0, n=10)


def test_a_alpha_closed_forms_tau_2_5():
    # rel err 1e-8 against the frozen closed forms
    assert a_alpha("nr", 2.0 / 3.0) == pytest.approx(2.0 * math.sqrt(math.pi), rel=1e-8)
    assert a_alpha("cl", 2.0 / 3.0) == pytest.approx(4.0, rel=1e-8)
    assert a_alpha("grg", 2.0 / 3.0) == pytest.approx(math.pi, rel=1e-8)


@pytest.mark.parametrize("kernel", ["nr", "cl", "grg"])
@pytest.mark.parametrize("alpha", [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95])
def test_two_quadrature_routes_agree(kernel, alpha):
    adaptive = a_alpha(kernel, alpha, rel_tol=1e-10)
    fixed = a_alpha_gauss(kernel, alpha)
    assert fixed == pytest.approx(adaptive, rel=1e-8)
    # and both against the closed form
    assert adaptive == pytest.approx(closed_form_a(kernel, alpha), rel=1e-8)


def test_lambda_crit_chain_nr():
    cc = lambda_crit(ModelParams(tau=2.5, tail_const_C=1.0, n=10, kernel="nr"))
    assert cc.a_alpha == pytest.approx(2.0 * math.sqrt(math.pi), rel=1e-10)
    assert cc.b_alpha == pytest.approx(1.023327, abs=1e-6)
    assert cc.lambda_c == pytest.approx(0.285366, abs=1e-6)
    # exact-arithmetic relation between the reported fields
    exps = derive_exponents(ModelParams(tau=2.5, tail_const_C=1.0, n=10))
    assert cc.lambda_c == pytest.approx(math.sqrt(exps.eta / (4.0 * cc.b_alpha)), rel=1e-12)
    assert cc.b_alpha == pytest.approx(
        exps.c_F ** (2.0 / exps.alpha) * cc.a_alpha / (exps.alpha * exps.mu ** (1.0 / exps.alpha)),
        rel=1e-12,
    )


def test_lambda_crit_cl_ratio():
    nr = lambda_crit(ModelParams(tau=2.5, tail_const_C=1.0, n=10, kernel="nr"))
    cl = lambda_crit(ModelParams(tau=2.5, tail_const_C=1.0, n=10, kernel="cl"))
    # B scales linearly in A, so lambda_c scales by sqrt(A_nr/A_cl)
    assert cl.lambda_c == pytest.approx(
        nr.lambda_c * math.sqrt(nr.a_alpha / cl.a_alpha), rel=1e-10
    )
    assert cl.lambda_c == pytest.approx(0.285366 * math.sqrt(3.5449077 / 4.0), abs=1e-6)


def test_lambda_crit_scales_with_tail_constant():
    base = lambda_crit(ModelParams(tau=2.5, tail_const_C=1.0, n=10))
    scaled = lambda_crit(ModelParams(tau=2.5, tail_const_C=8.0, n=10))
    # c_F -> 4 c_F and mu -> 4 mu; B picks up c_F^{2/alpha}/mu^{1/alpha} = 4^{3/2},
    # so lambda_c shrinks by 4^{-3/4}
    assert scaled.lambda_c == pytest.approx(base.lambda_c * 4.0 ** (-0.75), rel=1e-10)


@given(
    tau=st.floats(min_value=2.05, max_value=2.95),
    factor=st.floats(min_value=0.25, max_value=8.0),
)
@settings(max_examples=40, deadline=None)
def test_doubling_C_composite_scaling(tau, factor):
    """End-to-end scaling: multiplying C by f multiplies c_F and mu by
    f^{1/(tau-1)} and lambda_c by f^{-1/(2(tau-1))} (net of the B_alpha chain)."""
    p1 = ModelParams(tau=tau, tail_const_C=1.0, n=10)
    p2 = ModelParams(tau=tau, tail_const_C=factor, n=10)
    e1, e2 = derive_exponents(p1), derive_exponents(p2)
    g = factor ** (1.0 / (tau - 1.0))
    assert e2.c_F == pytest.approx(e1.c_F * g, rel=1e-10)
    assert e2.mu == pytest.approx(e1.mu * g, rel=1e-10)
    c1, c2 = lambda_crit(p1), lambda_crit(p2)
    # B ratio = g^{2/alpha}/g^{1/alpha} = g^{1/alpha}; lambda_c ratio = g^{-1/(2 alpha)}
    assert c2.lambda_c == pytest.approx(
        c1.lambda_c * g ** (-0.5 / e1.alpha), rel=1e-10
    )


def test_pi_n_definition():
    p = ModelParams(tau=2.5, tail_const_C=1.0, n=10 ** 6, lam=0.5)
    assert p.pi_n() == pytest.approx(0.5 * 10 ** (-6.0 * 0.25 / 1.0), rel=1e-12)


def test_invalid_kernel_rejected():
    with pytest.raises(ValueError):
        a_alpha("er", 0.66)
    with pytest.raises(ValueError):
        ModelParams(tau=2.5, tail_const_C=1.0, n=5, kernel="banana")


def test_a_alpha_rejects_bad_alpha():
    with pytest.raises(ValueError):
        a_alpha("nr", 0.5)
    with pytest.raises(ValueError):
        a_alpha("nr", 1.0)
