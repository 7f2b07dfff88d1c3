from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.channel.scenario import ChannelSet, ScenarioConfig, steering_is
from src.config.settings import FEASIBILITY_TOL
from src.utils.logging import logger

UNIT_MODULUS_TOL = 1e-12


class PhaseRecoveryError(ValueError):
    """The requested nu lies outside what unit-modulus elements can produce"""


@dataclass(frozen=True, eq=False)
class PhaseShiftVector:
    thetas: np.ndarray

    def __post_init__(self):
        thetas = np.asarray(self.thetas, dtype=complex)
        if thetas.ndim != 1:
            raise ValueError("Phase shifts must form a vector")
        if np.any(np.abs(np.abs(thetas) - 1.0) > UNIT_MODULUS_TOL):
            raise ValueError("Phase shifts must have unit modulus")
        object.__setattr__(self, "thetas", thetas)

    @property
    def size(self) -> int:
        return self.thetas.shape[0]

    @classmethod
    def from_angles(cls, angles: np.ndarray) -> "PhaseShiftVector":
        return cls(np.exp(1j * np.asarray(angles, dtype=float)))


def _pairwise_unit_sum(target: complex, count: int) -> np.ndarray:
    # count (even) unit phasors summing to target, |target| <= count
    if count == 0:
        return np.empty(0, dtype=complex)
    phi = np.angle(target) if target != 0 else 0.0
    gamma = np.arccos(np.clip(abs(target) / count, -1.0, 1.0))
    psis = np.empty(count, dtype=complex)
    psis[1::2] = np.exp(1j * (phi + gamma))
    # 2 target / count - e^(j(phi + gamma)) simplifies to e^(j(phi - gamma))
    psis[0::2] = np.exp(1j * (phi - gamma))
    return psis


def _unit_sum(target: complex, count: int, tol: float) -> np.ndarray:
    if count % 2 == 0:
        return _pairwise_unit_sum(target, count)

    magnitude = abs(target)
    direction = np.angle(target) if magnitude > 0 else 0.0
    if count == 1:
        if abs(magnitude - 1.0) > tol:
            raise PhaseRecoveryError(f"A single element only realizes |nu| = R, got |nu|/R = {magnitude:.6g}")
        return np.array([np.exp(1j * direction)])

    # Peel off the last element so the remainder fits the even construction
    if magnitude > count - 1:
        last = np.exp(1j * direction)
    elif magnitude >= 0.5:
        last = np.exp(1j * (direction + np.arccos(1.0 / (2.0 * magnitude))))
    else:
        last = np.exp(1j * direction)
    rest = _pairwise_unit_sum(target - last, count - 1)
    return np.append(rest, last)


def recover_phases(nu: complex, channels: ChannelSet, config: ScenarioConfig,
                   tol: float = FEASIBILITY_TOL) -> PhaseShiftVector:
    """
    Construct unit-modulus phase shifts whose aggregate reflection equals nu

    Args:
        nu: Target value of alpha2 h3^T Theta xi_I(psi2)
        channels: Channels derived from config
        config: Scenario supplying the surface layout
        tol: Relative slack on the outer bound N alpha2 alpha3

    Returns:
        PhaseShiftVector of length N
    """
    n = config.n_elements
    scale = float(channels.alphas[1] * channels.alphas[2])
    outer = n * scale
    if abs(nu) > outer * (1.0 + tol):
        logger.error("Reflection outside the realizable disk", {"abs_nu": abs(nu), "outer_radius": outer})
        raise PhaseRecoveryError(f"|nu| = {abs(nu):.6g} exceeds N alpha2 alpha3 = {outer:.6g}")

    target = complex(nu) / (scale * channels.xis[2])
    if abs(target) > n:
        target *= n / abs(target)
    psis = _unit_sum(target, n, tol)

    is_args = (config.ny, config.nz, config.wavelength, config.spacing_is)
    pattern = steering_is(channels.psi3_aod, *is_args) * steering_is(channels.psi2_aoa, *is_args)
    return PhaseShiftVector(psis * np.conj(pattern))


def reflected_nu(theta: PhaseShiftVector, channels: ChannelSet) -> complex:
    """alpha2 h3^T Theta xi_I(psi2), evaluated directly"""
    cfg = channels.config
    incident = steering_is(channels.psi2_aoa, cfg.ny, cfg.nz, cfg.wavelength, cfg.spacing_is)
    return complex(channels.alphas[1] * (channels.h3 @ (theta.thetas * incident)))


def apply_phase_shifts(theta: PhaseShiftVector, channels: ChannelSet) -> Tuple[complex, np.ndarray]:
    """
    Composite channels seen through the surface

    Returns:
        (h1 + h3^T Theta h2, h4 + H5 Theta h3)
    """
    if theta.size != channels.n_elements:
        raise ValueError(f"Expected {channels.n_elements} phase shifts, got {theta.size}")
    effective_comm = complex(channels.h1 + channels.h3 @ (theta.thetas * channels.h2))
    effective_radar = channels.h4 + channels.H5 @ (theta.thetas * channels.h3)
    return effective_comm, effective_radar
