from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.channel.scenario import ChannelSet, ScenarioConfig, steering_ra
from src.config.settings import ESTIMATOR_CHUNK_SIZE
from src.optimization.phase_recovery import apply_phase_shifts
from src.utils.logging import logger

SeedLike = Union[int, Sequence[int]]


@dataclass(frozen=True, eq=False)
class EchoBlock:
    Y_R: np.ndarray
    x: np.ndarray
    seed: SeedLike
    wavelength: float
    spacing_ra: float
    Z_R: Optional[np.ndarray] = None


@dataclass(frozen=True)
class AoaEstimate:
    psi_hat: float
    alpha_hat: complex
    grid_resolution: float


@dataclass(frozen=True, eq=False)
class MonteCarloSummary:
    psi_hats: np.ndarray
    alpha_hats: np.ndarray
    errors_deg: np.ndarray

    @property
    def trials(self) -> int:
        return self.errors_deg.shape[0]

    @property
    def mean_error_deg(self) -> float:
        return float(np.mean(self.errors_deg))

    @property
    def std_error_deg(self) -> float:
        return float(np.std(self.errors_deg))


def search_grid(grid_step: float) -> np.ndarray:
    """Uniform angle grid over [0, pi] with spacing no larger than grid_step"""
    if not grid_step > 0:
        raise ValueError(f"Grid step must be positive, got {grid_step}")
    count = int(np.ceil(np.pi / grid_step - 1e-9)) + 1
    return np.linspace(0.0, np.pi, max(count, 2))


def _refine_peaks(metrics: np.ndarray, grid: np.ndarray) -> np.ndarray:
    # One parabolic step on the log-metric around each row's grid maximum
    metrics = np.atleast_2d(metrics)
    rows = np.arange(metrics.shape[0])
    peak = np.argmax(metrics, axis=1)
    psi = grid[peak].astype(float)

    interior = (peak > 0) & (peak < grid.size - 1)
    if np.any(interior):
        r, i = rows[interior], peak[interior]
        logs = np.log(np.maximum(metrics[r[:, None], i[:, None] + np.array([-1, 0, 1])], np.finfo(float).tiny))
        left, centre, right = logs[:, 0], logs[:, 1], logs[:, 2]
        curvature = left - 2.0 * centre + right
        offset = np.zeros_like(curvature)
        concave = curvature < 0
        offset[concave] = 0.5 * (left[concave] - right[concave]) / curvature[concave]
        psi[interior] += np.clip(offset, -0.5, 0.5) * (grid[1] - grid[0])
    return np.clip(psi, 0.0, np.pi)


def mismatched_echo_model(channels: ChannelSet, config: ScenarioConfig, x: np.ndarray) -> np.ndarray:
    """Noise-free echo the DFBS assumes, zeta h4 h1 x^T, with no surface in the model"""
    return config.rcs_coeff * np.outer(channels.h4 * channels.h1, x)


def _symbols(rng: np.random.Generator, config: ScenarioConfig) -> np.ndarray:
    # Constant-modulus quaternary symbols with power P
    indices = rng.integers(0, 4, size=config.block_length)
    return np.sqrt(config.tx_power) * np.exp(1j * (np.pi / 4.0 + 0.5 * np.pi * indices))


def _complex_noise(rng: np.random.Generator, variance: float, shape) -> np.ndarray:
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def simulate_echo(channels: ChannelSet, theta, config: ScenarioConfig, seed: SeedLike,
                  noiseless: bool = False) -> EchoBlock:
    """
    Echo received at the DFBS, zeta (h4 + H5 Theta h3)(h1 + h3^T Theta h2) x^T + Z_R

    Args:
        channels: Channels derived from config
        theta: PhaseShiftVector, or None when no surface is present
        config: Scenario supplying power, noise, block length and zeta
        seed: Reproducibility handle; integer or sequence of integers
        noiseless: Drop Z_R from the returned echo (it is still drawn)

    Returns:
        EchoBlock with the M x L echo and the transmitted symbols
    """
    rng = np.random.default_rng(seed)
    x = _symbols(rng, config)
    noise = _complex_noise(rng, config.noise_power, (config.m_antennas, config.block_length))

    if theta is None:
        echo = mismatched_echo_model(channels, config, x)
    else:
        effective_comm, effective_radar = apply_phase_shifts(theta, channels)
        echo = config.rcs_coeff * np.outer(effective_radar * effective_comm, x)

    return EchoBlock(
        Y_R=echo if noiseless else echo + noise,
        x=x,
        seed=seed,
        wavelength=config.wavelength,
        spacing_ra=config.spacing_ra,
        Z_R=noise
    )


def simulate_downlink(channels: ChannelSet, theta, config: ScenarioConfig,
                      seed: SeedLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Samples at the user terminal, (h1 + h3^T Theta h2) x^T + z_U^T

    Returns:
        (y_U, x) as length-L vectors
    """
    rng = np.random.default_rng(seed)
    x = _symbols(rng, config)
    gain = channels.h1 if theta is None else apply_phase_shifts(theta, channels)[0]
    y_u = gain * x + _complex_noise(rng, config.noise_power, config.block_length)
    return y_u, x


def estimate_link_snr(y_u: np.ndarray, x: np.ndarray, noise_power: float) -> float:
    """Least-squares gain estimate turned into P |g|^2 / sigma^2"""
    power = float(np.mean(np.abs(x) ** 2))
    gain = np.vdot(x, y_u) / np.vdot(x, x).real
    return power * abs(gain) ** 2 / noise_power


def ml_estimate_aoa(echo: EchoBlock, grid_step: float) -> AoaEstimate:
    """
    Maximum-likelihood AoA under the single-path model the DFBS assumes

    Args:
        echo: Received block and known symbols
        grid_step: Search resolution in radians over [0, pi]

    Returns:
        AoaEstimate with the refined argmax of |x^T Y^H xi_R(psi)|^2 and the
        matching least-squares amplitude
    """
    grid = search_grid(grid_step)
    m = echo.Y_R.shape[0]
    scan = steering_ra(grid, m, echo.wavelength, echo.spacing_ra)

    correlation = np.conj(echo.Y_R) @ echo.x
    metric = np.abs(scan @ correlation) ** 2
    psi_hat = float(_refine_peaks(metric, grid)[0])

    xi = steering_ra(psi_hat, m, echo.wavelength, echo.spacing_ra)
    alpha_hat = np.vdot(xi, echo.Y_R @ np.conj(echo.x)) / (m * np.vdot(echo.x, echo.x).real)
    return AoaEstimate(psi_hat=psi_hat, alpha_hat=complex(alpha_hat), grid_resolution=float(grid[1] - grid[0]))


def asymptotic_aoa_batch(channels: ChannelSet, nus, grid_step: float,
                         chunk_size: int = ESTIMATOR_CHUNK_SIZE) -> np.ndarray:
    """
    Large-block limit of the ML estimate for many reflections at once: the
    refined argmax of |(h4 + xi5 xi_R(psi5) nu)^H xi_R(psi)| for each nu
    """
    cfg = channels.config
    nus = np.atleast_1d(np.asarray(nus, dtype=complex))
    grid = search_grid(grid_step)
    ra_args = (cfg.m_antennas, cfg.wavelength, cfg.spacing_ra)
    scan = steering_ra(grid, *ra_args)
    reflected = channels.xis[4] * steering_ra(channels.psi5_aoa, *ra_args)

    psi_hat = np.empty(nus.size)
    for start in range(0, nus.size, chunk_size):
        block = nus[start:start + chunk_size]
        paths = np.conj(channels.h4[None, :] + block[:, None] * reflected[None, :])
        # Accumulate per antenna so each row's arithmetic is independent of the batch size
        response = np.zeros((block.size, grid.size), dtype=complex)
        for m in range(cfg.m_antennas):
            response += paths[:, m:m + 1] * scan[None, :, m]
        psi_hat[start:start + block.size] = _refine_peaks(np.abs(response), grid)
    return psi_hat


def asymptotic_aoa(channels: ChannelSet, nu: complex, grid_step: float) -> float:
    return float(asymptotic_aoa_batch(channels, [nu], grid_step)[0])


def user_snr(channels: ChannelSet, nu, config: ScenarioConfig):
    """(P / sigma^2) |h1 + xi2 nu|^2"""
    value = config.tx_power / config.noise_power * np.abs(channels.h1 + channels.xis[1] * np.asarray(nu)) ** 2
    return float(value) if np.ndim(value) == 0 else value


def angle_error_deg(psi_hat, psi_true):
    error = np.degrees(np.abs(np.asarray(psi_hat, dtype=float) - psi_true))
    return float(error) if np.ndim(error) == 0 else error


def monte_carlo_aoa_error(channels: ChannelSet, theta, config: ScenarioConfig, trials: int,
                          seed: int, grid_step: float, point_index: int = 0) -> MonteCarloSummary:
    """
    ML estimation over independent echoes; trial t uses seed (seed, point_index, t)

    Returns:
        MonteCarloSummary with per-trial estimates in trial order
    """
    if trials < 1:
        raise ValueError(f"Trials must be at least 1, got {trials}")

    psi_hats = np.empty(trials)
    alpha_hats = np.empty(trials, dtype=complex)
    for trial in range(trials):
        echo = simulate_echo(channels, theta, config, seed=(seed, point_index, trial))
        estimate = ml_estimate_aoa(echo, grid_step)
        psi_hats[trial] = estimate.psi_hat
        alpha_hats[trial] = estimate.alpha_hat

    errors = angle_error_deg(psi_hats, channels.psi4_aoa)
    logger.debug("Monte Carlo estimation finished",
                 {"trials": trials, "point": point_index, "mean_error_deg": float(np.mean(errors))})
    return MonteCarloSummary(psi_hats=psi_hats, alpha_hats=alpha_hats, errors_deg=np.atleast_1d(errors))
