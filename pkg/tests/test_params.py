import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from mmblockage.params import (ParameterError, SystemParams, alpha_i, derive, nlos_availability,
                               single_link_block_prob)

# mpmath, 30 digits
Q_URBAN = 0.909891613649039837
Q_TILDE_URBAN = 0.851380885627369697
R_TILDE = 65.1818067065620622


def test_defaults_match_reference_table():
    p = SystemParams()
    assert (p.blocker_speed_V, p.height_blocker_hB, p.height_ue_hR, p.height_bs_hT) == (1.0, 1.8, 1.4, 5.0)
    assert p.inv_mu == 0.5 and p.mu == 2.0
    assert p.self_block_angle_omega == pytest.approx(math.pi / 3)
    assert p.nlos_kappa == 3.0
    assert (p.mean_block_length_l, p.mean_block_width_w) == (10.0, 10.0)


def test_rc_over_mu_and_eff_fraction():
    c = derive(SystemParams(blocker_density_lambda_B=0.1))
    assert c.rc_over_mu == pytest.approx(0.353678, abs=1e-6)
    assert c.eff_fraction == pytest.approx(0.4 / 3.6, rel=1e-12)


def test_static_constants(urban):
    c = derive(urban)
    assert c.beta == pytest.approx(1.2732395447351627e-3, rel=1e-12)
    assert c.beta0 == pytest.approx(0.01, rel=1e-12)
    assert c.q == pytest.approx(Q_URBAN, rel=1e-12)
    assert c.q_tilde == pytest.approx(Q_TILDE_URBAN, rel=1e-12)
    assert c.R_tilde == pytest.approx(R_TILDE, rel=1e-12)


def test_q_against_scipy_quadrature(urban):
    c = derive(urban)
    ref, _ = quad(lambda r: math.exp(-(c.beta * r + c.beta0)) * 2 * r / 100 ** 2, 0, 100, epsabs=0, epsrel=1e-13)
    assert c.q == pytest.approx(ref, rel=1e-11)


def test_trivial_self_and_static():
    c = derive(SystemParams(self_block_angle_omega=0.0))
    assert c.p == 1.0 and c.q == 1.0


@pytest.mark.parametrize("lam_s", [1e-12, 1e-9, 1e-7, 1e-5])
def test_q_small_static_density_is_continuous(lam_s):
    c = derive(SystemParams(static_density_lambda_S=lam_s))
    ref, _ = quad(lambda r: math.exp(-(c.beta * r + c.beta0)) * 2 * r / 100 ** 2, 0, 100, epsabs=0, epsrel=1e-13)
    assert c.q == pytest.approx(ref, rel=1e-12)


def test_q_tilde_is_q_tilde_of_zero_range(urban):
    c = derive(urban)
    assert nlos_availability(c.beta, c.beta0, c.p, c.R, 0.0) == pytest.approx(c.p * c.q, rel=1e-14)
    assert nlos_availability(c.beta, c.beta0, c.p, c.R, c.R) == pytest.approx(1.0, rel=1e-14)


def test_alpha_examples():
    c = derive(SystemParams())
    assert alpha_i(c, 100.0) == pytest.approx(0.0707355, rel=1e-5)
    assert alpha_i(c, 0.0) == 0.0
    assert alpha_i(c, 200 / 3) == pytest.approx(0.047, abs=0.001)


@pytest.mark.parametrize("lam_b,r,expected", [
    (0.1, 100.0, 0.353678 / 1.353678),
    (0.1, 0.0, 0.0),
    (0.0, 100.0, 0.0),
])
def test_single_link_block_prob(lam_b, r, expected):
    c = derive(SystemParams(blocker_density_lambda_B=lam_b))
    assert single_link_block_prob(c, r) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("changes", [
    {"height_bs_hT": 1.8},
    {"height_bs_hT": 1.0},
    {"height_ue_hR": 1.9},
    {"bs_density_lambda_T": -1.0},
    {"blocker_density_lambda_B": math.nan},
    {"self_block_angle_omega": 2 * math.pi},
    {"inv_mu": 0.0},
    {"los_range_R": 0.0},
    {"path_loss_exponent_PLE": -1.0},
])
def test_invalid_parameters_rejected(changes):
    with pytest.raises(ParameterError):
        SystemParams(**changes)


def test_bs_below_blockers_message_names_inequality():
    with pytest.raises(ParameterError, match="height_blocker_hB < height_bs_hT"):
        SystemParams(height_bs_hT=1.5)


def test_negative_gain_rejected():
    with pytest.raises(ParameterError, match="NLOS range"):
        derive(SystemParams(nlos_attenuation_gamma_dB=-3.0))


def test_derive_is_pure(urban):
    assert derive(urban) == derive(urban)


@given(st.floats(0, 1), st.floats(1e-4, 1))
def test_c_increasing_in_blocker_density(lam_b, step):
    lo = derive(SystemParams(blocker_density_lambda_B=lam_b))
    hi = derive(SystemParams(blocker_density_lambda_B=lam_b + step))
    assert hi.C > lo.C


@given(st.floats(0.1, 5), st.floats(1e-3, 5))
def test_c_increasing_in_speed(v, step):
    assert derive(SystemParams(blocker_speed_V=v + step)).C > derive(SystemParams(blocker_speed_V=v)).C


@given(st.floats(0, 1e-3), st.floats(1e-6, 1e-3))
def test_q_decreasing_in_static_density(lam_s, step):
    assert derive(SystemParams(static_density_lambda_S=lam_s + step)).q < \
        derive(SystemParams(static_density_lambda_S=lam_s)).q


@given(st.floats(0, 6.0), st.floats(1e-3, 0.2))
def test_p_decreasing_in_omega(omega, step):
    assert derive(SystemParams(self_block_angle_omega=omega + step)).p < \
        derive(SystemParams(self_block_angle_omega=omega)).p
