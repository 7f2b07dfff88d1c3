import numpy as np
import pytest

from src.channel.scenario import (
    ScenarioConfig,
    baseline_snr,
    db_to_linear,
    dbm_to_watts,
    derive_channels,
    linear_to_db,
    path_loss,
    steering_is,
    steering_ra
)


@pytest.fixture
def config():
    return ScenarioConfig()


@pytest.fixture
def channels(config):
    return derive_channels(config)


def test_path_loss_values():
    """Test path loss against direct evaluation"""
    assert path_loss(1.0) == pytest.approx(10 ** -1.5, rel=1e-12)
    assert path_loss(10.0) == pytest.approx(10 ** -2.6, rel=1e-12)
    assert path_loss(1.0) > path_loss(2.0) > path_loss(4.0)


@pytest.mark.parametrize("distance", [0.0, -1.0, float("nan"), float("inf")])
def test_path_loss_rejects_invalid_distance(distance):
    """Test path loss with non-positive or non-finite distance"""
    with pytest.raises(ValueError):
        path_loss(distance)


def test_power_conversions():
    """Test dBm and dB conversions"""
    assert dbm_to_watts(10.0) == pytest.approx(0.01, rel=1e-12)
    assert dbm_to_watts(-110.0) == pytest.approx(1e-14, rel=1e-12)
    assert db_to_linear(3.0) == pytest.approx(1.99526231, rel=1e-8)
    assert linear_to_db(100.0) == pytest.approx(20.0)
    assert linear_to_db(0.0) == float("-inf")


def test_steering_ra_broadside():
    """Test RA steering vector at broadside is all ones"""
    np.testing.assert_allclose(steering_ra(np.pi / 2, 6, 0.06, 0.03), np.ones(6), atol=1e-12)


def test_steering_ra_half_wavelength_endfire():
    """Test RA steering vector with half-wavelength spacing at psi = 0"""
    vector = steering_ra(0.0, 4, 0.06, 0.03)
    np.testing.assert_allclose(vector, [1, -1, 1, -1], atol=1e-12)


def test_steering_ra_self_inner_product():
    """Test steering vector inner product with itself equals M"""
    vector = steering_ra(0.73, 4, 0.06, 0.03)
    assert np.vdot(vector, vector) == pytest.approx(4.0)
    np.testing.assert_allclose(np.abs(vector), 1.0, atol=1e-12)


def test_steering_ra_accepts_angle_arrays():
    """Test one steering row per angle"""
    angles = np.array([0.1, 0.5, 1.2])
    rows = steering_ra(angles, 4, 0.06, 0.03)
    assert rows.shape == (3, 4)
    np.testing.assert_allclose(rows[1], steering_ra(0.5, 4, 0.06, 0.03))


def test_steering_inner_product_dirichlet():
    """Test steering inner products against the Dirichlet kernel"""
    rng = np.random.default_rng(7)
    m, wavelength, spacing = 4, 0.06, 0.03
    for psi_a, psi_b in rng.uniform(0.0, np.pi, size=(100, 2)):
        u = 2.0 * np.pi / wavelength * spacing * (np.cos(psi_a) - np.cos(psi_b))
        if abs(np.sin(u / 2.0)) < 1e-12:
            expected = float(m)
        else:
            expected = abs(np.sin(m * u / 2.0) / np.sin(u / 2.0))
        actual = abs(np.vdot(steering_ra(psi_a, m, wavelength, spacing), steering_ra(psi_b, m, wavelength, spacing)))
        assert actual == pytest.approx(expected, abs=1e-9)


def test_steering_is_layout():
    """Test surface steering vector repeats the row pattern"""
    np.testing.assert_allclose(steering_is(np.pi / 2, 2, 2, 0.06, 0.03), np.ones(4), atol=1e-12)
    np.testing.assert_allclose(steering_is(0.4, 2, 1, 0.06, 0.03), steering_ra(0.4, 2, 0.06, 0.03))

    vector = steering_is(1.1, 5, 3, 0.06, 0.03)
    assert vector.shape == (15,)
    np.testing.assert_allclose(vector[:10], vector[5:])


def test_default_geometry(channels):
    """Test distances, angles and path loss of the default scenario"""
    assert channels.distances[0] == pytest.approx(np.sqrt(650.0))
    assert channels.alphas[0] == pytest.approx(8.974e-4, rel=1e-3)
    assert np.cos(channels.psi4_aoa) == pytest.approx(-5.0 / np.sqrt(650.0))
    assert np.cos(channels.psi2_aoa) == pytest.approx(20.0 / np.sqrt(500.0))


def test_colocation_and_shapes(channels, config):
    """Test colocated-array equalities and channel dimensions"""
    assert channels.alphas[3] == channels.alphas[0]
    assert channels.alphas[4] == channels.alphas[1]
    assert channels.psi5_aod == channels.psi2_aoa
    np.testing.assert_allclose(np.abs(channels.xis), 1.0, atol=1e-12)

    assert channels.n_elements == config.n_elements == 300
    assert channels.m_antennas == 4
    assert channels.H5.shape == (4, 300)
    assert channels.h1 == pytest.approx(channels.alphas[0] * channels.xis[0])


def test_derive_channels_deterministic(config):
    """Test identical configs give identical channels"""
    first, second = derive_channels(config), derive_channels(config)
    assert first.h1 == second.h1
    assert np.array_equal(first.h2, second.h2)
    assert np.array_equal(first.H5, second.H5)


def test_coincident_positions_rejected():
    """Test scenario validation with coincident positions"""
    with pytest.raises(ValueError):
        ScenarioConfig(pos_is=(10.0, 20.0, 0.0))


@pytest.mark.parametrize("changes", [{"m_antennas": 1}, {"ny": 0}, {"wavelength": 0.0}, {"snr_floor": -1.0}])
def test_invalid_scenario_values(config, changes):
    """Test range validation of scenario fields"""
    with pytest.raises(ValueError):
        config.with_updates(**changes)


def test_snr_enhancement(config):
    """Test SNR floor relative to the no-surface link"""
    baseline = baseline_snr(config)
    alpha1 = path_loss(np.sqrt(650.0))
    assert baseline == pytest.approx(config.tx_power * alpha1 ** 2 / config.noise_power)
    assert config.with_snr_enhancement(0.0).snr_floor == pytest.approx(baseline, rel=1e-12)
    assert config.with_snr_enhancement(3.0).snr_floor == pytest.approx(baseline * db_to_linear(3.0))
