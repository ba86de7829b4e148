import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mmrelay.model import (BindingTerm, NetworkParams, ScalingExponents, as_fraction,
                           csi_quality, is_asymptotically_deterministic, is_favourable,
                           linear_sinr_condition, realize_parameters, scaling_exponent)

F = Fraction
# exponents on a grid of sixths plus quarters, enough to hit every boundary
exps = st.sampled_from(sorted({F(n, 12) for n in range(13)}))


def test_csi_quality_examples():
    assert csi_quality(10, 1.0) == pytest.approx(10 / 11)
    assert csi_quality(4, 0.25) == 0.5
    assert csi_quality(3, math.inf) == 1.0


@pytest.mark.parametrize("tau,P_t", [(0, 1.0), (2, 0.0), (2, -1.0), (1.5, 1.0)])
def test_csi_quality_rejects(tau, P_t):
    with pytest.raises(ValueError):
        csi_quality(tau, P_t)


@given(st.integers(1, 64), st.floats(1e-3, 1e3))
def test_csi_quality_depends_on_energy_only(tau, P_t):
    pc = csi_quality(tau, P_t)
    assert 0 < pc < 1
    assert csi_quality(1, tau * P_t) == pytest.approx(pc, rel=1e-14)


def test_params_validation():
    with pytest.raises(ValueError):
        NetworkParams(M=4, K=8, P=1, Q=1, tau=8, P_t=1)
    with pytest.raises(ValueError):
        NetworkParams(M=16, K=8, P=1, Q=1, tau=4, P_t=1)
    with pytest.raises(ValueError):
        NetworkParams(M=16, K=2, P=0, Q=1, tau=2, P_t=1)
    with pytest.raises(ValueError):
        NetworkParams(M=16, K=2, P=1, Q=1, tau=2, P_t=1, P_c=0.9)


@given(st.floats(0.01, 1.0), st.integers(1, 30))
def test_from_csi_quality_round_trip(pc, K):
    p = NetworkParams.from_csi_quality(M=64, K=K, P=1.0, Q=1.0, P_c=pc)
    assert p.P_c == pc
    assert csi_quality(p.tau, p.P_t) == pytest.approx(pc, rel=1e-12)


def test_as_fraction():
    assert as_fraction(0.1) == F(1, 10)
    assert as_fraction("1/2") == F(1, 2)
    with pytest.raises(TypeError):
        as_fraction(True)


TABLE = [
    (dict(r_k=1), F(0)),
    (dict(r_c=1), F(0)),
    (dict(r_k=F(1, 2), r_q=F(1, 2)), F(0)),
    (dict(), F(1)),
    (dict(r_c=F(1, 2)), F(1, 2)),
]


@pytest.mark.parametrize("kw,r_s", TABLE)
def test_tabulated_exponents(kw, r_s):
    assert scaling_exponent(ScalingExponents(**kw)).r_s == r_s


def test_exponent_bounds():
    with pytest.raises(ValueError):
        ScalingExponents(r_k=F(3, 2))
    with pytest.raises(ValueError):
        ScalingExponents(c0=0)


def test_binding_tie_label():
    r = scaling_exponent(ScalingExponents(r_p=F(1, 2), r_q=F(1, 2)))
    assert r.binding_term is BindingTerm.RELAY_PER_USER_POWER
    r = scaling_exponent(ScalingExponents(r_p=F(3, 4), r_q=F(1, 2)))
    assert r.binding_term is BindingTerm.SOURCE_POWER


@given(exps, exps, exps, exps)
def test_scaling_properties(rk, rp, rq, rc):
    e = ScalingExponents(r_k=rk, r_p=rp, r_q=rq, r_c=rc)
    rep = scaling_exponent(e)
    assert rep.r_s == 1 - rc - max(rp, rk + rq)
    assert is_favourable(e) == (rep.r_s >= 0) == rep.favourable
    assert rep.linear_regime == (rep.r_s == 1) == linear_sinr_condition(e)
    assert rep.deterministic_sufficient == is_asymptotically_deterministic(e)
    if rep.deterministic_sufficient and rep.r_s >= 0:
        assert rep.favourable
        # constraint two then caps the CSI exponent at 1/2
        assert rc <= F(1, 2)


def test_deterministic_scenarios():
    assert is_asymptotically_deterministic(ScalingExponents(r_p=F(1, 2)))
    assert is_asymptotically_deterministic(
        ScalingExponents(r_c=F(1, 2), r_p=F(1, 4), r_q=F(1, 2)))
    assert not is_asymptotically_deterministic(ScalingExponents())
    # an r_s not implied by the tuple breaks the first constraint
    assert not is_asymptotically_deterministic(ScalingExponents(r_p=F(1, 2)), r_s=F(1, 4))


def test_realize_parameters():
    p = realize_parameters(ScalingExponents(r_k=1, k0=0.1, p0=0.1, q0=0.1, c0=1.25), 100)
    assert (p.K, p.P, p.Q) == (10, pytest.approx(10.0), pytest.approx(10.0))
    assert p.P_c == pytest.approx(0.8)
    p = realize_parameters(ScalingExponents(r_c=1, c0=0.01), 64)
    assert p.P_c == 1.0                        # 100/M clamps below M = 100
    p = realize_parameters(ScalingExponents(r_k=F(1, 2), r_q=F(1, 2), q0=1), 200)
    assert p.K == 14 and p.Q == pytest.approx(1 / math.sqrt(200))
    with pytest.raises(ValueError):
        realize_parameters(ScalingExponents(r_k=1, k0=2), 16)
