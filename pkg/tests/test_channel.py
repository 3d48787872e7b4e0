import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iabsim.channel import (ChannelSet, build_channels, channel_row, departure_angles,
                            reference_path_loss_db, steering_vector)
from iabsim.errors import DegenerateLinkError
from iabsim.scenario import ScenarioConfig, place_users


@pytest.mark.parametrize("f,expected", [(28, -61.39), (1, -32.45), (10, -52.45)])
def test_reference_path_loss(f, expected):
    assert reference_path_loss_db(f) == pytest.approx(expected, abs=5e-3)


@pytest.mark.parametrize("rx,theta,phi", [
    ((0, 0, -50), 0.0, 0.0),
    ((1, 0, 0), math.pi / 2, 0.0),
    ((0, 1, 0), math.pi / 2, math.pi / 2),
])
def test_departure_angles(rx, theta, phi):
    t, p = departure_angles((0, 0, 0), rx)
    assert t == pytest.approx(theta, abs=1e-15)
    assert p == pytest.approx(phi, abs=1e-15)


def test_departure_angles_straight_down():
    assert departure_angles((0, 0, 150), (0, 0, 100)) == (0.0, 0.0)


def test_coincident_endpoints_raise():
    with pytest.raises(DegenerateLinkError):
        departure_angles((1, 2, 3), (1, 2, 3))


def scalar_steering(theta, phi, n_x, n_y, r):
    # direct per-element evaluation, row-major with y fastest
    out = []
    for ix in range(1, n_x + 1):
        for iy in range(1, n_y + 1):
            out.append(cmath.exp(1j * math.pi * r * math.sin(theta)
                                 * ((ix - 1) * math.cos(phi) + (iy - 1) * math.sin(phi))))
    return np.array(out)


def test_steering_two_element_endfire():
    a = steering_vector(math.pi / 2, 0.0, 2, 1).elements
    np.testing.assert_allclose(a, [1, -1], atol=1e-15)


def test_steering_boresight_and_single_element():
    np.testing.assert_array_equal(steering_vector(0.0, 1.234, 4, 4).elements, np.ones(16))
    np.testing.assert_array_equal(steering_vector(0.7, 0.3, 1, 1).elements, [1])


@given(st.floats(0, math.pi / 2), st.floats(-math.pi, math.pi), st.integers(1, 6), st.integers(1, 6),
       st.sampled_from([0.5, 1.0, 2.0]))
@settings(max_examples=100, deadline=None)
def test_steering_matches_scalar_formula(theta, phi, n_x, n_y, r):
    a = steering_vector(theta, phi, n_x, n_y, r).elements
    np.testing.assert_allclose(a, scalar_steering(theta, phi, n_x, n_y, r), atol=1e-12)
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-15)


def test_channel_row_norm_vertical_50m():
    h, d, gain = channel_row((0, 0, 150), (0, 0, 100), ScenarioConfig())
    assert d == 50
    # 64 * 10**((-20 log10 28 - 32.45) / 10) / 50**2, evaluated with mpmath
    assert np.vdot(h, h).real == pytest.approx(1.8574789578574415e-08, rel=1e-12)
    assert np.vdot(h, h).real == pytest.approx(1.857e-8, rel=1e-3)


def test_build_channels_shapes_and_backhaul_row():
    c = ScenarioConfig()
    g = place_users(c, np.random.default_rng(0))
    ch = build_channels(g, c)
    assert ch.H_a.shape == (4, 64) and ch.H_t.shape == (3, 64)
    assert ch.backhaul_row_index == 3
    np.testing.assert_allclose(ch.distances_a[3], 80.0)
    np.testing.assert_array_equal(ch.aerial_user_rows, [0, 1, 2])
    for H, gains in ((ch.H_a, ch.gains_a), (ch.H_t, ch.gains_t)):
        np.testing.assert_allclose(np.sum(np.abs(H) ** 2, axis=1), 64 * gains, rtol=1e-12)


def test_colocated_users_give_identical_rows():
    c = ScenarioConfig()
    g = place_users(c, np.random.default_rng(0))
    pos = g.aerial_ue_positions
    h1, *_ = channel_row(g.donor_position, pos[0], c)
    h2, *_ = channel_row(g.donor_position, pos[0].copy(), c)
    np.testing.assert_array_equal(h1, h2)


def test_channel_set_json_round_trip():
    c = ScenarioConfig()
    ch = build_channels(place_users(c, np.random.default_rng(5)), c)
    back = ChannelSet.from_json(ch.to_json())
    np.testing.assert_array_equal(back.H_a, ch.H_a)
    np.testing.assert_array_equal(back.H_t, ch.H_t)
    np.testing.assert_array_equal(back.distances_t, ch.distances_t)
    assert back.backhaul_row_index == ch.backhaul_row_index
