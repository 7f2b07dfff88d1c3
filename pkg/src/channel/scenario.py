from dataclasses import dataclass, field
from typing import Any, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config.settings import (
    DEFAULT_POS_DFBS,
    DEFAULT_POS_USER,
    DEFAULT_POS_IS,
    DEFAULT_M,
    DEFAULT_NY,
    DEFAULT_NZ,
    DEFAULT_WAVELENGTH_M,
    DEFAULT_SPACING_M,
    DEFAULT_TX_POWER_DBM,
    DEFAULT_NOISE_POWER_DBM,
    DEFAULT_BLOCK_LENGTH
)

Position = Tuple[float, float, float]
ArrayLike = Union[float, np.ndarray]

# RA elements lie along x, IS rows along y
RA_AXIS = np.array([1.0, 0.0, 0.0])
IS_AXIS = np.array([0.0, 1.0, 0.0])


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0:
        return float("-inf")
    return float(10.0 * np.log10(value))


class ScenarioConfig(BaseModel):
    """Geometry and radio constants of one experiment; powers are stored in watts"""
    model_config = ConfigDict(frozen=True)

    pos_dfbs: Position = DEFAULT_POS_DFBS
    pos_user: Position = DEFAULT_POS_USER
    pos_is: Position = DEFAULT_POS_IS
    m_antennas: int = Field(DEFAULT_M, ge=2)
    ny: int = Field(DEFAULT_NY, ge=1)
    nz: int = Field(DEFAULT_NZ, ge=1)
    wavelength: float = Field(DEFAULT_WAVELENGTH_M, gt=0)
    spacing_ra: float = Field(DEFAULT_SPACING_M, gt=0)
    spacing_is: float = Field(DEFAULT_SPACING_M, gt=0)
    tx_power: float = Field(dbm_to_watts(DEFAULT_TX_POWER_DBM), gt=0)
    noise_power: float = Field(dbm_to_watts(DEFAULT_NOISE_POWER_DBM), gt=0)
    snr_floor: float = Field(0.0, ge=0)
    block_length: int = Field(DEFAULT_BLOCK_LENGTH, ge=1)
    rcs_coeff_re: float = 1.0
    rcs_coeff_im: float = 0.0

    @model_validator(mode="after")
    def _check_geometry(self) -> "ScenarioConfig":
        pairs = {
            "dfbs-user": (self.pos_dfbs, self.pos_user),
            "dfbs-is": (self.pos_dfbs, self.pos_is),
            "user-is": (self.pos_user, self.pos_is),
        }
        for name, (p, q) in pairs.items():
            if not np.linalg.norm(np.subtract(p, q)) > 0:
                raise ValueError(f"Positions {name} coincide; distances must be strictly positive")
        return self

    @property
    def n_elements(self) -> int:
        return self.ny * self.nz

    @property
    def rcs_coeff(self) -> complex:
        return complex(self.rcs_coeff_re, self.rcs_coeff_im)

    def with_updates(self, **changes: Any) -> "ScenarioConfig":
        """Return a re-validated copy with the given fields replaced"""
        return type(self).model_validate({**self.model_dump(), **changes})

    def with_snr_enhancement(self, enhancement_db: float) -> "ScenarioConfig":
        """Set the SNR floor to the no-IS link SNR raised by enhancement_db"""
        return self.with_updates(snr_floor=baseline_snr(self) * db_to_linear(enhancement_db))


@dataclass(frozen=True, eq=False)
class ChannelSet:
    config: ScenarioConfig
    distances: np.ndarray
    alphas: np.ndarray
    xis: np.ndarray
    psi2_aoa: float
    psi3_aod: float
    psi4_aoa: float
    psi5_aoa: float
    psi5_aod: float
    h1: complex
    h2: np.ndarray
    h3: np.ndarray
    h4: np.ndarray
    H5: np.ndarray = field(repr=False)

    @property
    def n_elements(self) -> int:
        return self.h2.shape[0]

    @property
    def m_antennas(self) -> int:
        return self.h4.shape[0]


def path_loss(distance: float) -> float:
    """
    Amplitude path-loss coefficient 10^(-(30 + 22 log10 d) / 20)

    Args:
        distance: Link distance in meters

    Returns:
        Real coefficient, strictly decreasing in distance
    """
    if not np.isfinite(distance) or distance <= 0:
        raise ValueError(f"Distance must be positive, got {distance}")
    return float(10.0 ** (-(30.0 + 22.0 * np.log10(distance)) / 20.0))


def steering_ra(psi: ArrayLike, m: int, wavelength: float, spacing: float) -> np.ndarray:
    """
    Steering vector of the M-element radar receive array along the x-axis

    Args:
        psi: Angle(s) in radians; an array of angles yields one row per angle
        m: Number of receive antennas
        wavelength: Carrier wavelength in meters
        spacing: Element spacing in meters

    Returns:
        Complex array of shape psi.shape + (m,)
    """
    phase = (2.0 * np.pi / wavelength) * spacing * np.multiply.outer(np.cos(psi), np.arange(m))
    return np.exp(-1j * phase)


def steering_is(psi: float, ny: int, nz: int, wavelength: float, spacing: float) -> np.ndarray:
    """
    Steering vector of the Ny x Nz surface: the row response repeated Nz times

    Args:
        psi: Angle in radians against the row axis
        ny: Elements per row
        nz: Elements per column
        wavelength: Carrier wavelength in meters
        spacing: Element spacing in meters

    Returns:
        Complex vector of length ny * nz
    """
    row = steering_ra(psi, ny, wavelength, spacing)
    return np.kron(np.ones(nz), row)


def _axis_angle(direction: np.ndarray, axis: np.ndarray) -> float:
    unit = direction / np.linalg.norm(direction)
    return float(np.arccos(np.clip(unit @ axis, -1.0, 1.0)))


def baseline_snr(config: ScenarioConfig) -> float:
    """Link SNR without the surface, P |h1|^2 / sigma^2"""
    d1 = float(np.linalg.norm(np.subtract(config.pos_user, config.pos_dfbs)))
    return config.tx_power * path_loss(d1) ** 2 / config.noise_power


def derive_channels(config: ScenarioConfig) -> ChannelSet:
    """
    Build every path-loss coefficient, phase exponential, angle and channel
    of the scenario. TA and RA are colocated, so d4 = d1 and d5 = d2.

    Args:
        config: Validated scenario

    Returns:
        ChannelSet with h1, h2, h3, h4 and H5 assembled
    """
    dfbs = np.asarray(config.pos_dfbs, dtype=float)
    user = np.asarray(config.pos_user, dtype=float)
    surface = np.asarray(config.pos_is, dtype=float)

    d1 = float(np.linalg.norm(user - dfbs))
    d2 = float(np.linalg.norm(surface - dfbs))
    d3 = float(np.linalg.norm(user - surface))
    if min(d1, d2, d3) <= 0:
        raise ValueError("Coincident positions in scenario geometry")

    psi2_aoa = _axis_angle(dfbs - surface, IS_AXIS)
    psi3_aod = _axis_angle(user - surface, IS_AXIS)
    psi4_aoa = _axis_angle(user - dfbs, RA_AXIS)
    psi5_aoa = _axis_angle(surface - dfbs, RA_AXIS)
    psi5_aod = psi2_aoa

    distances = np.array([d1, d2, d3, d1, d2])
    a1, a2, a3 = path_loss(d1), path_loss(d2), path_loss(d3)
    alphas = np.array([a1, a2, a3, a1, a2])

    k = 2.0 * np.pi / config.wavelength
    eps_r = config.spacing_ra
    xis = np.array([
        np.exp(-1j * k * d1) * np.exp(1j * k * eps_r * np.cos(psi4_aoa)),
        np.exp(-1j * k * d2) * np.exp(1j * k * eps_r * np.cos(psi5_aoa)),
        np.exp(-1j * k * d3),
        np.exp(-1j * k * d1),
        np.exp(-1j * k * d2),
    ])

    m = config.m_antennas
    is_args = (config.ny, config.nz, config.wavelength, config.spacing_is)
    ra_args = (m, config.wavelength, config.spacing_ra)

    h1 = complex(alphas[0] * xis[0])
    h2 = alphas[1] * xis[1] * steering_is(psi2_aoa, *is_args)
    h3 = alphas[2] * xis[2] * steering_is(psi3_aod, *is_args)
    h4 = alphas[3] * xis[3] * steering_ra(psi4_aoa, *ra_args)
    H5 = alphas[4] * xis[4] * np.outer(steering_ra(psi5_aoa, *ra_args), steering_is(psi5_aod, *is_args))

    return ChannelSet(
        config=config,
        distances=distances,
        alphas=alphas,
        xis=xis,
        psi2_aoa=psi2_aoa,
        psi3_aod=psi3_aod,
        psi4_aoa=psi4_aoa,
        psi5_aoa=psi5_aoa,
        psi5_aod=psi5_aod,
        h1=h1,
        h2=h2,
        h3=h3,
        h4=h4,
        H5=H5
    )
