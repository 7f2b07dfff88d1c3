from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from src.channel.scenario import ChannelSet, ScenarioConfig, steering_ra
from src.config.settings import (
    FEASIBILITY_TOL,
    DEFAULT_GRID_STEP_DEG,
    EXHAUSTIVE_RADIAL_STEPS,
    EXHAUSTIVE_ANGULAR_STEPS
)
from src.sensing.estimator import angle_error_deg, asymptotic_aoa_batch
from src.utils.logging import logger

SearchMode = Literal["min", "max", "max-aoa-error"]
Candidate = Tuple[int, complex]

# Index of the aligned outer-boundary point used by the max-inner search
ALIGNED_INDEX = 8


class InfeasibleScenarioError(ValueError):
    """The SNR floor cannot be met by any reflection the surface can produce"""


class DegenerateObjectiveError(ValueError):
    """Both quadratic and linear coefficients vanish; every feasible point is optimal"""


@dataclass(frozen=True)
class NuProblem:
    a: float
    b: complex
    const0: float
    h1: complex
    xi2: complex
    outer_radius: float
    forbidden_radius: float
    m_antennas: int
    probe: float

    @property
    def center(self) -> complex:
        """Center of the forbidden circle, -h1 xi2*"""
        return -self.h1 * np.conj(self.xi2)

    @property
    def snr_threshold(self) -> float:
        """eta sigma^2 / P"""
        return self.forbidden_radius ** 2


@dataclass(frozen=True)
class NuSolution:
    nu: complex
    objective: float
    candidate_index: int
    feasible: bool = True
    aoa_error_deg: Optional[float] = None


def _unit(z: complex) -> complex:
    # e^(j angle z), with the zero vector mapped to 1 so -0j never flips the phase
    if abs(z) == 0:
        return 1.0 + 0.0j
    return complex(np.exp(1j * np.angle(z)))


def build_problem(channels: ChannelSet, config: ScenarioConfig, probe: float) -> NuProblem:
    """
    Reduce the surface design to the complex-plane problem in nu for a probe angle

    Args:
        channels: Channels derived from config
        config: Scenario the channels belong to
        probe: Angle whose echo correlation is extremized (psi4 for the
            proposed method, psi5 for max-inner)

    Returns:
        NuProblem with a, b and const0 from the exact expansion of
        |(h4 + xi5 xi_R(psi5) nu)^H xi_R(probe)|^2
    """
    ra_args = (config.m_antennas, config.wavelength, config.spacing_ra)
    probe_vec = steering_ra(probe, *ra_args)
    s = np.vdot(steering_ra(channels.psi5_aoa, *ra_args), probe_vec)
    c = np.vdot(steering_ra(channels.psi4_aoa, *ra_args), probe_vec)

    alpha4 = float(channels.alphas[3])
    xi4, xi5 = channels.xis[3], channels.xis[4]

    return NuProblem(
        a=float(abs(s) ** 2),
        b=complex(alpha4 * xi4 * np.conj(c) * np.conj(xi5) * s),
        const0=float(alpha4 ** 2 * abs(c) ** 2),
        h1=channels.h1,
        xi2=complex(channels.xis[1]),
        outer_radius=float(config.n_elements * channels.alphas[1] * channels.alphas[2]),
        forbidden_radius=float(np.sqrt(config.noise_power) * np.sqrt(config.snr_floor / config.tx_power)),
        m_antennas=config.m_antennas,
        probe=float(probe)
    )


def objective_quadratic(nu, problem: NuProblem):
    """a|nu|^2 + 2 Re(b* nu) + const0; accepts scalars or arrays"""
    nu = np.asarray(nu, dtype=complex)
    value = problem.a * np.abs(nu) ** 2 + 2.0 * np.real(np.conj(problem.b) * nu) + problem.const0
    return float(value) if value.ndim == 0 else value


def is_feasible(nu, problem: NuProblem, tol: float = FEASIBILITY_TOL):
    """Outer-disk and SNR-floor membership with relative tolerance; accepts scalars or arrays"""
    if tol < 0:
        raise ValueError(f"Tolerance must be non-negative, got {tol}")
    nu = np.asarray(nu, dtype=complex)
    inside_disk = np.abs(nu) <= problem.outer_radius * (1.0 + tol)
    meets_floor = np.abs(problem.h1 + problem.xi2 * nu) ** 2 >= problem.snr_threshold * (1.0 - tol)
    result = inside_disk & meets_floor
    return bool(result) if result.ndim == 0 else result


def _is_degenerate(problem: NuProblem, tol: float) -> bool:
    m2 = problem.m_antennas ** 2
    return problem.a <= tol * m2 and abs(problem.b) <= tol * abs(problem.h1) * m2


def _require_feasible(problem: NuProblem, tol: float) -> None:
    reach = abs(problem.h1) + problem.outer_radius
    if reach < problem.forbidden_radius * (1.0 - tol):
        raise InfeasibleScenarioError(
            f"SNR floor unreachable: |h1| + R = {reach:.6g} < {problem.forbidden_radius:.6g}"
        )


def enumerate_candidates(problem: NuProblem, tol: float = FEASIBILITY_TOL) -> List[Candidate]:
    """
    Closed-form candidates for the point of the feasible region nearest to -b/a

    Args:
        problem: Reduced problem
        tol: Slack allowed on the arccos argument of the circle intersections

    Returns:
        (index, nu) pairs in index order; nu2/nu3 are omitted when the two
        boundary circles do not meet and nu1 when a = 0
    """
    if _is_degenerate(problem, tol):
        raise DegenerateObjectiveError("Objective is constant: a = 0 and b = 0")

    a, b = problem.a, problem.b
    R, rho = problem.outer_radius, problem.forbidden_radius
    center = problem.center
    candidates: List[Candidate] = []

    if a > 0:
        target = -b / a
        candidates.append((1, complex(target)))
        toward_target = _unit(target)
        toward_target_from_center = _unit(target - center)
    else:
        # -b/a sits at infinity in the direction of -b
        toward_target = _unit(-b)
        toward_target_from_center = toward_target

    h1_abs = abs(problem.h1)
    if R > 0 and h1_abs > 0:
        cos_arg = (rho ** 2 - R ** 2 - h1_abs ** 2) / (2.0 * R * h1_abs)
        if abs(cos_arg) <= 1.0 + tol:
            gamma = np.arccos(np.clip(cos_arg, -1.0, 1.0))
            base = np.angle(-center)
            candidates.append((2, complex(R * np.exp(1j * (base + gamma)))))
            candidates.append((3, complex(R * np.exp(1j * (base - gamma)))))

    candidates.append((4, complex(center + rho * toward_target_from_center)))
    candidates.append((5, complex(center - rho * toward_target_from_center)))
    candidates.append((6, complex(R * toward_target)))
    candidates.append((7, complex(-R * toward_target)))
    return candidates


def _objective_scale(problem: NuProblem) -> float:
    R = problem.outer_radius
    return max(problem.const0, problem.a * R ** 2 + 2.0 * abs(problem.b) * R, np.finfo(float).tiny)


def _snr_maximizing(problem: NuProblem) -> NuSolution:
    nu = problem.outer_radius * _unit(-problem.center)
    return NuSolution(nu=complex(nu), objective=objective_quadratic(nu, problem), candidate_index=0)


def _select(problem: NuProblem, candidates: Sequence[Candidate], tol: float, maximize: bool) -> NuSolution:
    feasible = [(index, nu) for index, nu in candidates if is_feasible(nu, problem, tol)]
    if not feasible:
        logger.warning("No closed-form candidate is feasible; using SNR-maximizing point",
                       {"candidates": len(candidates)})
        return _snr_maximizing(problem)

    values = [(index, nu, objective_quadratic(nu, problem)) for index, nu in feasible]
    tie_tol = 1e-12 * _objective_scale(problem)

    if maximize:
        best_value = max(value for _, _, value in values)
        ties = [item for item in values if item[2] >= best_value - tie_tol]
        index, nu, value = min(ties, key=lambda item: (np.mod(np.angle(item[1]), 2.0 * np.pi), item[0]))
    else:
        index, nu, value = values[0]
        for item in values[1:]:
            if item[2] < value - tie_tol:
                index, nu, value = item

    logger.debug("Selected candidate", {"index": index, "objective": value, "feasible_candidates": len(feasible)})
    return NuSolution(nu=nu, objective=value, candidate_index=index)


def solve_min(problem: NuProblem, tol: float = FEASIBILITY_TOL) -> NuSolution:
    """
    Global minimizer of the echo correlation over the feasible region (the proposed method)

    Args:
        problem: Problem built with probe psi4
        tol: Relative feasibility tolerance

    Returns:
        NuSolution for the feasible candidate with the smallest objective
    """
    _require_feasible(problem, tol)
    try:
        candidates = enumerate_candidates(problem, tol)
    except DegenerateObjectiveError:
        logger.debug("Degenerate objective; returning SNR-maximizing point")
        return _snr_maximizing(problem)
    return _select(problem, candidates, tol, maximize=False)


def solve_max(problem: NuProblem, tol: float = FEASIBILITY_TOL) -> NuSolution:
    """
    Feasible maximizer of the objective (the max-inner baseline, probe psi5).
    The maximum of a convex objective sits on the boundary, so nu1 is skipped
    and the outer-boundary point aligned with b is added.
    """
    _require_feasible(problem, tol)
    try:
        candidates = enumerate_candidates(problem, tol)
    except DegenerateObjectiveError:
        logger.debug("Degenerate objective; returning SNR-maximizing point")
        return _snr_maximizing(problem)

    boundary = [(index, nu) for index, nu in candidates if index != 1]
    boundary.append((ALIGNED_INDEX, complex(problem.outer_radius * _unit(problem.b))))
    return _select(problem, boundary, tol, maximize=True)


def grid_resolution_bound(problem: NuProblem, radial_steps: int, angular_steps: int, cells: float = 2.0) -> float:
    """
    Largest objective gap between any point of the region and a feasible polar
    grid point within `cells` grid cells of it

    Returns:
        a d^2 + 2 (a R + |b|) d with d = cells (dr + R dphi)
    """
    R = problem.outer_radius
    dr = R / (radial_steps - 1)
    dphi = 2.0 * np.pi / angular_steps
    delta = cells * (dr + R * dphi)
    return problem.a * delta ** 2 + 2.0 * (problem.a * R + abs(problem.b)) * delta


def brute_force_nu(
    problem: NuProblem,
    mode: SearchMode = "min",
    channels: Optional[ChannelSet] = None,
    radial_steps: int = EXHAUSTIVE_RADIAL_STEPS,
    angular_steps: int = EXHAUSTIVE_ANGULAR_STEPS,
    grid_step: Optional[float] = None,
    extra_points: Sequence[complex] = (),
    tol: float = FEASIBILITY_TOL
) -> NuSolution:
    """
    Exhaustive search over the feasible polar grid r e^(j phi), r in [0, R], phi in [0, 2 pi)

    Args:
        problem: Reduced problem supplying the constraints (and the objective for min/max)
        mode: 'min' / 'max' extremize the quadratic objective; 'max-aoa-error'
            maximizes the asymptotic AoA error against psi4 (needs channels)
        channels: Channels for the AoA evaluation
        radial_steps: Radii from 0 to R inclusive
        angular_steps: Phases over one turn
        grid_step: Estimator resolution in radians for 'max-aoa-error'
        extra_points: Additional points evaluated alongside the grid
        tol: Relative feasibility tolerance

    Returns:
        NuSolution with candidate_index 0; ties go to the smallest radius, then smallest phase
    """
    if radial_steps < 2 or angular_steps < 2:
        raise ValueError("Grid needs at least 2 radial and 2 angular steps")
    if mode == "max-aoa-error" and channels is None:
        raise ValueError("Mode 'max-aoa-error' requires channels")

    radii = np.linspace(0.0, problem.outer_radius, radial_steps)
    phases = np.arange(angular_steps) * (2.0 * np.pi / angular_steps)
    grid = (radii[:, None] * np.exp(1j * phases[None, :])).ravel()
    extras = np.asarray(extra_points, dtype=complex).ravel()

    points = np.concatenate([grid, extras])
    radius_key = np.concatenate([np.repeat(radii, angular_steps), np.abs(extras)])
    phase_key = np.concatenate([np.tile(phases, radial_steps), np.mod(np.angle(extras), 2.0 * np.pi)])
    points = points[np.lexsort((phase_key, radius_key))]

    points = points[is_feasible(points, problem, tol)]
    if points.size == 0:
        raise InfeasibleScenarioError("No feasible grid point")

    if mode == "min":
        values = objective_quadratic(points, problem)
        best = int(np.argmin(values))
        return NuSolution(nu=complex(points[best]), objective=float(values[best]), candidate_index=0)
    if mode == "max":
        values = objective_quadratic(points, problem)
        best = int(np.argmax(values))
        return NuSolution(nu=complex(points[best]), objective=float(values[best]), candidate_index=0)
    if mode == "max-aoa-error":
        step = grid_step if grid_step is not None else np.deg2rad(DEFAULT_GRID_STEP_DEG)
        errors = angle_error_deg(asymptotic_aoa_batch(channels, points, step), channels.psi4_aoa)
        best = int(np.argmax(errors))
        nu = complex(points[best])
        logger.debug("Exhaustive search finished", {"points": points.size, "error_deg": float(errors[best])})
        return NuSolution(
            nu=nu,
            objective=objective_quadratic(nu, problem),
            candidate_index=0,
            aoa_error_deg=float(errors[best])
        )
    raise ValueError(f"Unknown search mode: {mode}")
