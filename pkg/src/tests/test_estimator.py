import numpy as np
import pytest

from src.channel.scenario import ScenarioConfig, baseline_snr, dbm_to_watts, derive_channels, steering_ra
from src.optimization.phase_recovery import recover_phases
from src.sensing.estimator import (
    EchoBlock,
    angle_error_deg,
    asymptotic_aoa,
    asymptotic_aoa_batch,
    estimate_link_snr,
    mismatched_echo_model,
    ml_estimate_aoa,
    monte_carlo_aoa_error,
    search_grid,
    simulate_downlink,
    simulate_echo,
    user_snr
)

FINE_STEP = np.deg2rad(0.01)
COARSE_STEP = np.deg2rad(0.05)


@pytest.fixture
def config():
    return ScenarioConfig().with_snr_enhancement(0.0)


@pytest.fixture
def channels(config):
    return derive_channels(config)


@pytest.fixture
def outer(channels, config):
    return config.n_elements * channels.alphas[1] * channels.alphas[2]


def test_angle_error_examples():
    """Test angle error arithmetic"""
    assert angle_error_deg(np.pi / 2, np.pi / 2) == 0.0
    assert angle_error_deg(np.pi, 0.0) == pytest.approx(180.0)
    assert angle_error_deg(1.0, 0.5) == pytest.approx(28.6479, abs=1e-4)


def test_angle_error_metric_properties():
    """Test symmetry and triangle inequality"""
    rng = np.random.default_rng(1)
    for a, b, c in rng.uniform(0.0, np.pi, size=(50, 3)):
        assert angle_error_deg(a, b) == pytest.approx(angle_error_deg(b, a))
        assert angle_error_deg(a, c) <= angle_error_deg(a, b) + angle_error_deg(b, c) + 1e-9


def test_search_grid():
    """Test grid covers [0, pi] with the requested resolution"""
    grid = search_grid(COARSE_STEP)
    assert grid[0] == 0.0
    assert grid[-1] == pytest.approx(np.pi)
    assert grid[1] - grid[0] <= COARSE_STEP + 1e-15
    with pytest.raises(ValueError):
        search_grid(0.0)


def test_simulate_echo_deterministic(channels, config):
    """Test fixed seeds reproduce identical blocks"""
    theta = recover_phases(0.0, channels, config)
    first = simulate_echo(channels, theta, config, seed=(4, 0, 1))
    second = simulate_echo(channels, theta, config, seed=(4, 0, 1))
    other = simulate_echo(channels, theta, config, seed=(4, 0, 2))

    assert np.array_equal(first.Y_R, second.Y_R)
    assert np.array_equal(first.x, second.x)
    assert not np.array_equal(first.Y_R, other.Y_R)


def test_symbol_power(channels, config):
    """Test constant-modulus symbols carry power P"""
    echo = simulate_echo(channels, None, config, seed=0)
    assert echo.x.shape == (config.block_length,)
    assert np.mean(np.abs(echo.x) ** 2) == pytest.approx(config.tx_power, rel=1e-12)


def test_zero_reflectivity_leaves_noise(channels):
    """Test zeta = 0 gives pure noise"""
    config = ScenarioConfig(rcs_coeff_re=0.0)
    theta = recover_phases(0.0, channels, config)
    echo = simulate_echo(channels, theta, config, seed=3)
    assert np.array_equal(echo.Y_R, echo.Z_R)


def test_noiseless_echo_is_rank_one(channels, config):
    """Test single-path echo columns are multiples of the direct steering vector"""
    direct = steering_ra(channels.psi4_aoa, config.m_antennas, config.wavelength, config.spacing_ra)

    echo = simulate_echo(channels, None, config, seed=1, noiseless=True)
    ratios = echo.Y_R / direct[:, None]
    np.testing.assert_allclose(ratios, np.broadcast_to(ratios[0], ratios.shape), rtol=1e-12)

    theta = recover_phases(0.0, channels, config)
    with_surface = simulate_echo(channels, theta, config, seed=1, noiseless=True)
    ratios = with_surface.Y_R / direct[:, None]
    np.testing.assert_allclose(ratios, np.broadcast_to(ratios[0], ratios.shape), rtol=1e-6)


def test_mismatched_model(channels, config):
    """Test the surface-free echo model"""
    echo = simulate_echo(channels, None, config, seed=2, noiseless=True)
    np.testing.assert_allclose(echo.Y_R, mismatched_echo_model(channels, config, echo.x))


def test_ml_estimate_noiseless_consistency(channels, config):
    """Test noiseless surface-free estimation over many trials"""
    for trial in range(100):
        echo = simulate_echo(channels, None, config, seed=(0, 0, trial), noiseless=True)
        estimate = ml_estimate_aoa(echo, FINE_STEP)
        assert angle_error_deg(estimate.psi_hat, channels.psi4_aoa) < 0.01
        assert 0.0 <= estimate.psi_hat <= np.pi
        assert estimate.grid_resolution <= FINE_STEP + 1e-15


def test_ml_estimate_synthetic_rank_one():
    """Test recovery of a known angle from a synthetic block"""
    psi0 = 1.1
    rng = np.random.default_rng(0)
    x = np.exp(1j * rng.uniform(0, 2 * np.pi, size=200))
    echo = EchoBlock(Y_R=np.outer(steering_ra(psi0, 4, 0.06, 0.03), x), x=x, seed=0,
                     wavelength=0.06, spacing_ra=0.03)

    estimate = ml_estimate_aoa(echo, COARSE_STEP)
    assert abs(estimate.psi_hat - psi0) < COARSE_STEP
    assert estimate.alpha_hat == pytest.approx(1.0, abs=1e-2)


def test_ml_estimate_global_phase_invariance(channels, config):
    """Test a unit-modulus scaling of the block leaves the estimate unchanged"""
    echo = simulate_echo(channels, None, config, seed=9)
    rotated = EchoBlock(Y_R=echo.Y_R * np.exp(0.7j), x=echo.x, seed=echo.seed,
                        wavelength=echo.wavelength, spacing_ra=echo.spacing_ra)
    assert ml_estimate_aoa(rotated, COARSE_STEP).psi_hat == pytest.approx(
        ml_estimate_aoa(echo, COARSE_STEP).psi_hat, abs=1e-9)


def test_asymptotic_limits(channels, config):
    """Test the large-block estimate for no reflection and a dominant reflection"""
    assert abs(asymptotic_aoa(channels, 0.0, COARSE_STEP) - channels.psi4_aoa) < COARSE_STEP
    dominant = 1e6 * channels.alphas[0]
    assert abs(asymptotic_aoa(channels, dominant, COARSE_STEP) - channels.psi5_aoa) < COARSE_STEP


def test_asymptotic_batch_independent_of_chunking(channels, outer):
    """Test batch rows do not depend on the chunk size"""
    rng = np.random.default_rng(12)
    nus = outer * np.sqrt(rng.uniform(size=37)) * np.exp(1j * rng.uniform(0, 2 * np.pi, size=37))
    full = asymptotic_aoa_batch(channels, nus, COARSE_STEP, chunk_size=256)
    chunked = asymptotic_aoa_batch(channels, nus, COARSE_STEP, chunk_size=5)

    np.testing.assert_allclose(full, chunked, rtol=0, atol=1e-12)
    assert asymptotic_aoa(channels, nus[3], COARSE_STEP) == pytest.approx(full[3], abs=1e-12)


def test_noiseless_ml_matches_asymptotic(channels, config, outer):
    """Test noiseless ML estimation equals the large-block estimate"""
    nu = 0.5 * outer * np.exp(1.0j)
    theta = recover_phases(nu, channels, config)
    echo = simulate_echo(channels, theta, config, seed=6, noiseless=True)
    assert ml_estimate_aoa(echo, COARSE_STEP).psi_hat == pytest.approx(
        asymptotic_aoa(channels, nu, COARSE_STEP), abs=1e-6)


def test_noisy_ml_converges_to_asymptotic(channels, config, outer):
    """Test averaged noisy estimates approach the large-block estimate"""
    quiet = config.with_updates(noise_power=dbm_to_watts(-140.0))
    nu = 0.5 * outer * np.exp(1.0j)
    theta = recover_phases(nu, channels, quiet)

    summary = monte_carlo_aoa_error(channels, theta, quiet, trials=100, seed=1, grid_step=COARSE_STEP)
    assert abs(np.mean(summary.psi_hats) - asymptotic_aoa(channels, nu, COARSE_STEP)) < 3 * COARSE_STEP


def test_noisy_surface_free_accuracy(channels, config):
    """Test mean surface-free error with a quiet receiver"""
    quiet = config.with_updates(noise_power=dbm_to_watts(-130.0))
    summary = monte_carlo_aoa_error(channels, None, quiet, trials=50, seed=2, grid_step=FINE_STEP)
    assert summary.mean_error_deg < 0.1


def test_more_noise_means_more_error(channels, config):
    """Test error grows when the noise power rises by 30 dB"""
    quiet = config.with_updates(noise_power=dbm_to_watts(-140.0))
    loud = config.with_updates(noise_power=dbm_to_watts(-110.0))
    quiet_error = monte_carlo_aoa_error(channels, None, quiet, 50, seed=3, grid_step=FINE_STEP).mean_error_deg
    loud_error = monte_carlo_aoa_error(channels, None, loud, 50, seed=3, grid_step=FINE_STEP).mean_error_deg
    assert loud_error >= quiet_error


@pytest.mark.slow
def test_more_noise_means_more_error_per_seed(channels, config):
    """Test the 30 dB noise ordering holds seed by seed with a zero-reflection surface"""
    quiet = config.with_updates(noise_power=dbm_to_watts(-140.0))
    loud = config.with_updates(noise_power=dbm_to_watts(-110.0))
    theta = recover_phases(0.0, channels, quiet)

    seeds = 200
    violations = 0
    for seed in range(seeds):
        quiet_error = monte_carlo_aoa_error(channels, theta, quiet, 4, seed=seed, grid_step=COARSE_STEP).mean_error_deg
        loud_error = monte_carlo_aoa_error(channels, theta, loud, 4, seed=seed, grid_step=COARSE_STEP).mean_error_deg
        if loud_error < quiet_error:
            violations += 1
    assert violations <= 0.05 * seeds



def test_monte_carlo_trial_seeds(channels, config):
    """Test per-trial results follow (seed, point, trial) seeding"""
    summary = monte_carlo_aoa_error(channels, None, config, trials=4, seed=11, grid_step=COARSE_STEP, point_index=2)
    assert summary.trials == 4
    for trial in range(4):
        echo = simulate_echo(channels, None, config, seed=(11, 2, trial))
        assert summary.psi_hats[trial] == ml_estimate_aoa(echo, COARSE_STEP).psi_hat

    with pytest.raises(ValueError):
        monte_carlo_aoa_error(channels, None, config, trials=0, seed=0, grid_step=COARSE_STEP)


def test_user_snr_examples(channels, config, outer):
    """Test link SNR for no reflection, coherent reflection and cancellation"""
    ratio = config.tx_power / config.noise_power
    h1, xi2 = channels.h1, channels.xis[1]

    assert user_snr(channels, 0.0, config) == pytest.approx(baseline_snr(config))
    aligned = outer * np.exp(1j * np.angle(h1 * np.conj(xi2)))
    assert user_snr(channels, aligned, config) == pytest.approx(ratio * (abs(h1) + outer) ** 2)
    assert abs(h1) <= outer
    assert user_snr(channels, -h1 * np.conj(xi2), config) == pytest.approx(0.0, abs=1e-6 * ratio * abs(h1) ** 2)


def test_downlink_snr_estimate(channels, config):
    """Test empirical link SNR from simulated user samples"""
    y_u, x = simulate_downlink(channels, None, config, seed=5)
    assert y_u.shape == x.shape == (config.block_length,)
    assert estimate_link_snr(y_u, x, config.noise_power) == pytest.approx(baseline_snr(config), rel=0.01)
