"""Unit tests for the network simulator."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dronecov.analytic import (
    NetworkScenario,
    QuadratureSpec,
    mean_interference,
)
from dronecov.channel import (
    AntennaPattern,
    ChannelParams,
    EnvironmentParams,
    LinkGeometry,
    antenna_gain,
    los_probability,
    path_loss,
)
from dronecov.errors import DomainError
from dronecov.montecarlo import (
    CoverageEstimate,
    NetworkRealization,
    SimulationSpec,
    _drop_rng,
    compute_sir,
    default_disk_radius,
    estimate_coverage,
    far_field_mean,
    laplace_empirical,
    sample_network,
)

URBAN = EnvironmentParams(built_fraction=0.3, buildings_per_km2=500.0,
                          height_scale=15.0)
CHANNEL = ChannelParams(alpha_los=2.09, alpha_nlos=3.75,
                        intercept_los=7.762471166286911e-05,
                        intercept_nlos=0.0005128613839913648,
                        m_los=3, m_nlos=1)
PATTERN = AntennaPattern(beamwidth_deg=40.0, downtilt_deg=30.0,
                         gain_main=10.0, gain_side=0.5)


def make_scenario(ue_height=60.0, tx_power=10 ** -0.6, sir_threshold=0.3,
                  channel=CHANNEL):
    return NetworkScenario(bs_density=50e-6, bs_height=30.0,
                           ue_height=ue_height, tx_power=tx_power,
                           sir_threshold=sir_threshold, channel=channel,
                           env=URBAN, pattern=PATTERN)


SCN = make_scenario()


# ------------------------------------------------------------------ sampling

def test_sampled_count_matches_poisson_mean():
    spec = SimulationSpec(num_drops=1, disk_radius=5000.0)
    counts = [sample_network(SCN, spec, _drop_rng(100, i)).positions.shape[0]
              for i in range(400)]
    expect = 50e-6 * math.pi * 5000.0 ** 2
    # 400 realizations give a 2 percent standard error on the mean
    assert abs(np.mean(counts) / expect - 1.0) < 0.06
    assert np.std(counts) == pytest.approx(math.sqrt(expect), rel=0.2)


def test_sampled_positions_inside_disk():
    spec = SimulationSpec(num_drops=1, disk_radius=2000.0)
    real = sample_network(SCN, spec, _drop_rng(0, 0))
    radii = np.hypot(real.positions[:, 0], real.positions[:, 1])
    assert radii.max() <= 2000.0
    assert real.los.dtype == bool
    assert np.all(real.fading > 0.0)


def test_los_fraction_matches_probability_in_annulus():
    spec = SimulationSpec(num_drops=1, disk_radius=3000.0)
    hits = total = 0
    for i in range(60):
        real = sample_network(SCN, spec, _drop_rng(200, i))
        radii = np.hypot(real.positions[:, 0], real.positions[:, 1])
        band = (radii > 90.0) & (radii < 110.0)
        hits += int(real.los[band].sum())
        total += int(band.sum())
    p = los_probability(LinkGeometry(100.0, 30.0, 60.0), URBAN)
    se = math.sqrt(p * (1.0 - p) / total)
    assert abs(hits / total - p) <= 3.0 * se


def test_fixed_serving_distance_is_exact_minimum():
    spec = SimulationSpec(num_drops=1, disk_radius=3000.0,
                          fixed_serving_distance=150.0)
    for i in range(5):
        real = sample_network(SCN, spec, _drop_rng(7, i))
        radii = np.hypot(real.positions[:, 0], real.positions[:, 1])
        assert radii.min() == 150.0
        assert int(np.argmin(radii)) == 0


def test_forced_serving_state_is_applied():
    spec = SimulationSpec(num_drops=1, disk_radius=3000.0,
                          fixed_serving_distance=400.0,
                          force_serving_los=False)
    for i in range(5):
        real = sample_network(SCN, spec, _drop_rng(8, i))
        assert not real.los[0]


def test_fixed_distance_must_fit_in_disk():
    spec = SimulationSpec(num_drops=1, disk_radius=300.0,
                          fixed_serving_distance=500.0)
    with pytest.raises(DomainError):
        sample_network(SCN, spec, _drop_rng(0, 0))


def test_fading_is_unit_mean():
    spec = SimulationSpec(num_drops=1, disk_radius=4000.0)
    real = sample_network(SCN, spec, _drop_rng(42, 0))
    n = real.fading.size
    assert abs(real.fading.mean() - 1.0) < 4.0 / math.sqrt(n)


# ----------------------------------------------------------------------- SIR

def test_sir_symmetric_pair_is_one():
    real = NetworkRealization(
        positions=np.array([[100.0, 0.0], [-100.0, 0.0]]),
        los=np.array([True, True]),
        fading=np.array([0.7, 0.7]))
    assert compute_sir(real, SCN) == 1.0


def test_sir_hand_computed_three_stations():
    scn = make_scenario(ue_height=10.0)
    positions = np.array([[60.0, 0.0], [0.0, 130.0], [-200.0, 50.0]])
    los = np.array([True, False, True])
    fading = np.array([1.2, 0.8, 2.0])
    real = NetworkRealization(positions, los, fading)
    terms = []
    for k in range(3):
        geom = LinkGeometry(float(np.hypot(*positions[k])), 30.0, 10.0)
        terms.append(scn.tx_power * antenna_gain(geom, PATTERN)
                     * path_loss(geom, CHANNEL, bool(los[k])) * fading[k])
    expect = terms[0] / (terms[1] + terms[2])
    assert_allclose(compute_sir(real, scn), expect, rtol=1e-12)


def test_sir_single_station_is_infinite():
    real = NetworkRealization(positions=np.array([[50.0, 10.0]]),
                              los=np.array([True]),
                              fading=np.array([1.0]))
    assert compute_sir(real, SCN) == math.inf
    assert compute_sir(real, SCN, far_mean=1e-9) < math.inf


def test_sir_transmit_power_cancels():
    spec = SimulationSpec(num_drops=1, disk_radius=2000.0)
    real = sample_network(SCN, spec, _drop_rng(5, 0))
    base = compute_sir(real, SCN)
    scaled = compute_sir(real, make_scenario(tx_power=10 ** 0.4))
    assert_allclose(scaled, base, rtol=1e-12)


def test_sir_empty_realization_rejected():
    real = NetworkRealization(positions=np.empty((0, 2)),
                              los=np.empty(0, dtype=bool),
                              fading=np.empty(0))
    with pytest.raises(DomainError):
        compute_sir(real, SCN)


# ----------------------------------------------------------------- far field

def test_far_field_mean_matches_analytic_mean_interference():
    quad = QuadratureSpec()
    for r0 in (50.0, 100.0, 300.0):
        assert_allclose(far_field_mean(SCN, r0),
                        mean_interference(SCN, r0, quad), rtol=1e-6)


def test_far_field_mean_scales_with_power_and_decreases():
    a = far_field_mean(SCN, 500.0)
    assert far_field_mean(SCN, 1000.0) < a
    assert_allclose(far_field_mean(make_scenario(tx_power=10 ** 0.4), 500.0),
                    10.0 * a, rtol=1e-12)
    with pytest.raises(DomainError):
        far_field_mean(SCN, 0.0)


def test_shallow_los_decay_rejected():
    ch = ChannelParams(alpha_los=1.9, alpha_nlos=3.75,
                       intercept_los=7.762471166286911e-05,
                       intercept_nlos=0.0005128613839913648,
                       m_los=3, m_nlos=1)
    with pytest.raises(DomainError):
        estimate_coverage(make_scenario(channel=ch),
                          SimulationSpec(num_drops=10))


def test_far_field_tail_closes_for_slow_blocked_decay():
    # A blocked-path exponent barely above the convergence limit keeps
    # the far-field mean finite; the tail must close through the
    # line-of-sight occupancy decay instead of waiting for the
    # blocked-path power law itself to become negligible.
    ch = ChannelParams(alpha_los=2.09, alpha_nlos=2.05,
                       intercept_los=7.762471166286911e-05,
                       intercept_nlos=0.0005128613839913648,
                       m_los=3, m_nlos=1)
    scn = make_scenario(channel=ch)
    mean = far_field_mean(scn, 500.0)
    assert math.isfinite(mean) and mean > 0.0
    est = estimate_coverage(scn, SimulationSpec(num_drops=20, seed=3))
    assert 0.0 <= est.probability <= 1.0


def test_far_field_tail_reports_non_decaying_occupancy():
    # Both terminals high above every rooftop: the path stays
    # line-of-sight forever, so with a near-limit exponent no finite
    # step sum can certify the tail and the failure must be clean.
    scn = NetworkScenario(bs_density=50e-6, bs_height=300.0,
                          ue_height=300.0, tx_power=10 ** -0.6,
                          sir_threshold=0.3, channel=CHANNEL,
                          env=URBAN, pattern=PATTERN)
    from dronecov.errors import QuadratureError
    with pytest.raises(QuadratureError, match="far-field"):
        far_field_mean(scn, 500.0)


# ---------------------------------------------------------------- estimation

def test_estimate_reference_value():
    est = estimate_coverage(SCN, SimulationSpec(num_drops=500, seed=11))
    assert isinstance(est, CoverageEstimate)
    assert est.probability == 0.34
    assert_allclose(est.std_error, 0.021184900282984576, rtol=1e-12)
    assert est.num_drops == 500
    assert est.diagnostics["disk_radius"] == pytest.approx(3424.47, abs=0.01)


def test_estimate_deterministic_and_worker_invariant():
    spec = SimulationSpec(num_drops=400, seed=5)
    a = estimate_coverage(SCN, spec, workers=1)
    b = estimate_coverage(SCN, spec, workers=2)
    c = estimate_coverage(SCN, spec, workers=1)
    assert a.probability == b.probability == c.probability
    assert a.std_error == b.std_error == c.std_error
    assert a.diagnostics == b.diagnostics


def test_estimate_near_zero_threshold_is_covered():
    est = estimate_coverage(make_scenario(sir_threshold=1e-12),
                            SimulationSpec(num_drops=200, seed=1))
    assert est.probability == 1.0
    assert est.std_error == 0.0


def test_estimate_std_error_bernoulli_bound():
    est = estimate_coverage(SCN, SimulationSpec(num_drops=300, seed=9))
    assert est.std_error <= 0.5 / math.sqrt(300) + 1e-12


def test_disk_radius_sufficiency_with_coupled_fields():
    # Shrinking the simulated disk from the default to half of it while
    # adjusting the far-field offset must not move the estimate by more
    # than one standard error.  The comparison reuses the same sampled
    # fields (restriction of a Poisson field is a Poisson field), so the
    # only difference is the truncation treatment itself.
    full_r = default_disk_radius(SCN)
    half_r = 0.5 * full_r
    far_full = far_field_mean(SCN, full_r)
    far_half = far_field_mean(SCN, half_r)
    spec = SimulationSpec(num_drops=3000, disk_radius=full_r, seed=21)
    cov_full = cov_half = 0
    for i in range(spec.num_drops):
        real = sample_network(SCN, spec, _drop_rng(spec.seed, i))
        radii = np.hypot(real.positions[:, 0], real.positions[:, 1])
        keep = radii <= half_r
        inner = NetworkRealization(real.positions[keep], real.los[keep],
                                   real.fading[keep])
        cov_full += compute_sir(real, SCN, far_full) > SCN.sir_threshold
        cov_half += compute_sir(inner, SCN, far_half) > SCN.sir_threshold
    p_full = cov_full / spec.num_drops
    p_half = cov_half / spec.num_drops
    se = math.sqrt(max(p_full * (1.0 - p_full), 1e-12) / spec.num_drops)
    assert abs(p_full - p_half) <= se


def test_estimate_rejects_bad_spec():
    with pytest.raises(DomainError):
        SimulationSpec(num_drops=0)
    with pytest.raises(DomainError):
        SimulationSpec(num_drops=10, disk_radius=-1.0)
    with pytest.raises(DomainError):
        SimulationSpec(num_drops=10, seed=-1)
    with pytest.raises(DomainError):
        SimulationSpec(num_drops=10, fixed_serving_distance=0.0)
    with pytest.raises(DomainError):
        estimate_coverage(SCN, SimulationSpec(num_drops=10), workers=0)


# ------------------------------------------------------- empirical transform

def test_laplace_empirical_reference_and_bounds():
    means, std_errs = laplace_empirical(
        SCN, SimulationSpec(num_drops=300, seed=12,
                            fixed_serving_distance=100.0), [5e7, 2e8])
    assert_allclose(means, [0.7836654035411682, 0.38074366573301965],
                    rtol=1e-12)
    assert np.all((means > 0.0) & (means < 1.0))
    assert np.all(std_errs > 0.0)
    assert means[0] > means[1]


def test_laplace_empirical_requires_conditioning():
    with pytest.raises(DomainError):
        laplace_empirical(SCN, SimulationSpec(num_drops=10), [1e7])
    with pytest.raises(DomainError):
        laplace_empirical(SCN, SimulationSpec(num_drops=10,
                                              fixed_serving_distance=100.0),
                          [-1.0])
