"""Unit tests for link-level primitives."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats

from dronecov.channel import (
    AntennaPattern,
    ChannelParams,
    EnvironmentParams,
    LinkGeometry,
    antenna_gain,
    depression_angle_deg,
    fading_pdf,
    gain_switch_radii,
    los_breakpoints,
    los_probability,
    los_step_levels,
    los_step_width,
    main_lobe_interval,
    path_loss,
    path_loss_curves,
    sample_fading,
)
from dronecov.errors import DomainError

URBAN = EnvironmentParams(built_fraction=0.3, buildings_per_km2=500.0,
                          height_scale=15.0)
CHANNEL = ChannelParams(alpha_los=2.09, alpha_nlos=3.75,
                        intercept_los=7.762471166286911e-05,
                        intercept_nlos=0.0005128613839913648,
                        m_los=3, m_nlos=1)
PATTERN = AntennaPattern(beamwidth_deg=40.0, downtilt_deg=30.0,
                         gain_main=10.0, gain_side=0.5)


# ---------------------------------------------------------------- path loss

def test_path_loss_reference_values():
    geom = LinkGeometry(ground_distance=100.0, bs_height=30.0, ue_height=60.0)
    assert_allclose(geom.distance_3d, 104.4030650891055, rtol=1e-14)
    assert_allclose(path_loss(geom, CHANNEL, los=True),
                    4.686939090549629e-09, rtol=1e-13)
    assert_allclose(path_loss(geom, CHANNEL, los=False),
                    1.3798291526491068e-11, rtol=1e-13)


def test_path_loss_is_intercept_at_unit_distance():
    geom = LinkGeometry(ground_distance=1.0, bs_height=10.0, ue_height=10.0)
    assert_allclose(path_loss(geom, CHANNEL, los=True),
                    CHANNEL.intercept_los, rtol=1e-15)


def test_path_loss_zero_distance_rejected():
    geom = LinkGeometry(ground_distance=0.0, bs_height=25.0, ue_height=25.0)
    with pytest.raises(DomainError):
        path_loss(geom, CHANNEL, los=True)


def test_path_loss_monotone_decreasing_in_distance():
    r = np.linspace(1.0, 500.0, 200)
    zl, zn = path_loss_curves(r, 30.0, 60.0, CHANNEL)
    assert np.all(np.diff(zl) < 0)
    assert np.all(np.diff(zn) < 0)


def test_path_loss_curves_match_scalar():
    r = np.array([10.0, 100.0, 330.0])
    zl, zn = path_loss_curves(r, 30.0, 60.0, CHANNEL)
    for i, ri in enumerate(r):
        geom = LinkGeometry(float(ri), 30.0, 60.0)
        assert_allclose(zl[i], path_loss(geom, CHANNEL, True), rtol=1e-14)
        assert_allclose(zn[i], path_loss(geom, CHANNEL, False), rtol=1e-14)


# ------------------------------------------------------------ line of sight

def test_los_probability_one_below_first_breakpoint():
    step = los_step_width(URBAN)
    assert_allclose(step, 81.64965809277261, rtol=1e-14)
    for r in (0.0, 1.0, 40.0, step * 0.999):
        assert los_probability(LinkGeometry(r, 30.0, 60.0), URBAN) == 1.0


def test_los_probability_single_blocker_value():
    # One blocker at link height 45 m: 1 - exp(-45^2 / (2 * 15^2)).
    geom = LinkGeometry(100.0, 30.0, 60.0)
    assert_allclose(los_probability(geom, URBAN),
                    0.9888910034617577, rtol=1e-15)


def test_los_probability_two_blocker_values():
    assert_allclose(los_probability(LinkGeometry(170.0, 30.0, 60.0), URBAN),
                    0.9539716869104711, rtol=1e-14)
    assert_allclose(los_probability(LinkGeometry(200.0, 30.0, 1.5), URBAN),
                    0.10473910295510545, rtol=1e-14)


def test_los_probability_constant_between_breakpoints():
    bps = los_breakpoints(URBAN, 1000.0)
    edges = np.concatenate([[0.0], bps, [1000.0]])
    for lo, hi in zip(edges[:-1], edges[1:]):
        samples = np.linspace(lo + 1e-6 * (hi - lo), hi - 1e-6 * (hi - lo), 7)
        vals = [los_probability(LinkGeometry(float(r), 30.0, 60.0), URBAN)
                for r in samples]
        assert max(vals) == min(vals)


def test_los_probability_monotone_in_user_height():
    heights = [1.5, 10.0, 30.0, 60.0, 120.0, 300.0]
    for r in (150.0, 400.0, 900.0):
        vals = [los_probability(LinkGeometry(r, 30.0, h), URBAN)
                for h in heights]
        assert np.all(np.diff(vals) >= 0.0)


def test_los_probability_nonincreasing_in_distance():
    rs = np.arange(10.0, 2000.0, 37.0)
    vals = [los_probability(LinkGeometry(float(r), 30.0, 60.0), URBAN)
            for r in rs]
    assert np.all(np.diff(vals) <= 1e-15)


def test_los_breakpoints_spacing():
    bps = los_breakpoints(URBAN, 500.0)
    step = los_step_width(URBAN)
    assert_allclose(bps, step * np.arange(1, 7), rtol=1e-14)
    assert los_breakpoints(URBAN, 0.0).size == 0
    assert los_breakpoints(URBAN, step * 0.5).size == 0


def test_los_step_levels_match_scalar_probability():
    levels = los_step_levels(URBAN, 30.0, 60.0, 12)
    step = los_step_width(URBAN)
    for k in range(13):
        r = (k + 0.5) * step
        geom = LinkGeometry(r, 30.0, 60.0)
        assert_allclose(levels[k], los_probability(geom, URBAN), rtol=1e-14)


def test_environment_validation():
    with pytest.raises(DomainError):
        EnvironmentParams(1.5, 500.0, 15.0)
    with pytest.raises(DomainError):
        EnvironmentParams(0.3, -1.0, 15.0)
    with pytest.raises(DomainError):
        EnvironmentParams(0.3, 500.0, 0.0)


# -------------------------------------------------------------- antenna gain

def test_antenna_gain_levels():
    # Drone above the base station: a downtilted beam never points at it.
    for r in (1.0, 50.0, 500.0):
        geom = LinkGeometry(r, 30.0, 60.0)
        assert antenna_gain(geom, PATTERN) == PATTERN.gain_side
    # Ground user at the cell edge of the beam footprint.
    assert antenna_gain(LinkGeometry(50.0, 30.0, 0.0), PATTERN) == 10.0
    assert antenna_gain(LinkGeometry(20.0, 30.0, 0.0), PATTERN) == 0.5
    assert antenna_gain(LinkGeometry(200.0, 30.0, 0.0), PATTERN) == 0.5


def test_antenna_gain_inclusive_edges():
    # At exactly the half-beamwidth angle the main lobe still applies.
    upper = AntennaPattern(40.0, 30.0, 10.0, 0.5)
    gap = 30.0
    r_edge = gap / math.tan(math.radians(50.0))
    geom = LinkGeometry(r_edge, 30.0, 0.0)
    assert_allclose(depression_angle_deg(r_edge, 30.0, 0.0), 50.0, atol=1e-10)
    assert antenna_gain(geom, upper) == 10.0


def test_gain_switch_radii_ground_user():
    radii = gain_switch_radii(30.0, 0.0, PATTERN)
    assert_allclose(radii, [25.1729889353184, 170.1384545885313], rtol=1e-13)
    # Distances just inside/outside each switch agree with the pointwise gain.
    for r, expect in [(25.0, 0.5), (25.3, 10.0), (170.0, 10.0), (170.3, 0.5)]:
        assert antenna_gain(LinkGeometry(r, 30.0, 0.0), PATTERN) == expect


def test_gain_switch_radii_empty_for_high_user():
    assert gain_switch_radii(30.0, 60.0, PATTERN) == []
    assert main_lobe_interval(30.0, 60.0, PATTERN) is None


def test_main_lobe_interval_equal_heights():
    level = AntennaPattern(40.0, 0.0, 10.0, 0.5)
    assert main_lobe_interval(25.0, 25.0, level) == (0.0, math.inf)
    tilted = AntennaPattern(40.0, 30.0, 10.0, 0.5)
    assert main_lobe_interval(25.0, 25.0, tilted) is None


def test_main_lobe_interval_uptilt_reaches_drone():
    up = AntennaPattern(beamwidth_deg=20.0, downtilt_deg=-30.0,
                        gain_main=10.0, gain_side=0.5)
    lo, hi = main_lobe_interval(30.0, 90.0, up)
    assert_allclose(lo, 60.0 / math.tan(math.radians(40.0)), rtol=1e-13)
    assert_allclose(hi, 60.0 / math.tan(math.radians(20.0)), rtol=1e-13)
    mid = 0.5 * (lo + hi)
    assert antenna_gain(LinkGeometry(mid, 30.0, 90.0), up) == 10.0


def test_pattern_validation():
    with pytest.raises(DomainError):
        AntennaPattern(0.0, 30.0, 10.0, 0.5)
    with pytest.raises(DomainError):
        AntennaPattern(40.0, 100.0, 10.0, 0.5)
    with pytest.raises(DomainError):
        AntennaPattern(40.0, 30.0, 10.0, 0.0)


# ------------------------------------------------------------------- fading

def test_fading_pdf_matches_gamma_density():
    x = np.linspace(0.01, 6.0, 60)
    for m in (1, 2, 3, 8):
        expect = stats.gamma.pdf(x, a=m, scale=1.0 / m)
        assert_allclose(fading_pdf(x, m), expect, rtol=1e-12)
    assert_allclose(fading_pdf(1.0, 3), 13.5 * math.exp(-3.0), rtol=1e-14)


def test_fading_pdf_normalization_and_unit_mean():
    for m in (1, 3, 5):
        total, _ = integrate.quad(lambda x: fading_pdf(x, m), 0.0, np.inf)
        mean, _ = integrate.quad(lambda x: x * fading_pdf(x, m), 0.0, np.inf)
        assert_allclose(total, 1.0, rtol=1e-9)
        assert_allclose(mean, 1.0, rtol=1e-9)


def test_fading_pdf_edge_cases():
    assert fading_pdf(0.0, 1) == 1.0
    assert fading_pdf(0.0, 2) == 0.0
    assert fading_pdf(-1.0, 3) == 0.0
    with pytest.raises(DomainError):
        fading_pdf(1.0, 0)
    with pytest.raises(DomainError):
        fading_pdf(1.0, 2.5)


def test_sample_fading_moments():
    rng = np.random.default_rng(7)
    for m in (1, 3):
        draws = np.array([sample_fading(m, rng) for _ in range(20000)])
        assert_allclose(draws.mean(), 1.0, atol=0.02)
        assert_allclose(draws.var(), 1.0 / m, atol=0.03)


def test_sample_fading_deterministic():
    a = sample_fading(3, np.random.default_rng(123))
    b = sample_fading(3, np.random.default_rng(123))
    assert a == b


# ------------------------------------------------------------------- params

def test_channel_params_validation():
    with pytest.raises(DomainError):
        ChannelParams(0.0, 3.75, 1e-4, 5e-4, 3, 1)
    with pytest.raises(DomainError):
        ChannelParams(2.09, 3.75, 1e-4, 5e-4, 0, 1)
    with pytest.raises(DomainError):
        ChannelParams(2.09, 3.75, 1e-4, 5e-4, 1.5, 1)


def test_link_geometry_validation():
    with pytest.raises(DomainError):
        LinkGeometry(-1.0, 30.0, 60.0)
    with pytest.raises(DomainError):
        LinkGeometry(10.0, -5.0, 60.0)
