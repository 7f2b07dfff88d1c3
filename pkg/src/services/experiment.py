from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.channel.scenario import ScenarioConfig, derive_channels, linear_to_db
from src.config.settings import (
    DEFAULT_GRID_STEP_DEG,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    EXHAUSTIVE_RADIAL_STEPS,
    EXHAUSTIVE_ANGULAR_STEPS,
    SWEEP_WORKERS
)
from src.optimization.nu_solver import (
    DegenerateObjectiveError,
    InfeasibleScenarioError,
    NuSolution,
    brute_force_nu,
    build_problem,
    enumerate_candidates,
    objective_quadratic,
    solve_max,
    solve_min
)
from src.optimization.phase_recovery import recover_phases
from src.sensing.estimator import (
    angle_error_deg,
    asymptotic_aoa,
    monte_carlo_aoa_error,
    user_snr
)
from src.utils.logging import logger

Method = Literal["proposed", "exhaustive", "maxinner"]
Estimator = Literal["asymptotic", "monte-carlo"]
SweepName = Literal["is_location_y", "is_location_x", "ny", "snr_enhancement_db"]

METHODS: Tuple[Method, ...] = ("proposed", "exhaustive", "maxinner")
NAN = float("nan")


class ExperimentSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    base: ScenarioConfig = ScenarioConfig()
    sweep: SweepName
    values: Tuple[float, ...] = Field(min_length=1)
    estimator: Estimator = "asymptotic"
    trials: int = Field(DEFAULT_TRIALS, ge=1)
    seed: int = DEFAULT_SEED
    grid_step_deg: float = Field(DEFAULT_GRID_STEP_DEG, gt=0)
    methods: Tuple[Method, ...] = Field(METHODS, min_length=1)
    snr_enhancement_db: Optional[float] = None
    exhaustive_radial_steps: int = Field(EXHAUSTIVE_RADIAL_STEPS, ge=2)
    exhaustive_angular_steps: int = Field(EXHAUSTIVE_ANGULAR_STEPS, ge=2)
    workers: int = Field(SWEEP_WORKERS, ge=1)


@dataclass
class PointResult:
    method: str
    feasible: bool
    nu: complex
    error_deg: float
    snr_db: float
    candidate_index: int
    trials: int
    utility: float
    outer_radius: float
    forbidden_radius: float
    center: complex

    @classmethod
    def infeasible(cls, method: str) -> "PointResult":
        return cls(
            method=method,
            feasible=False,
            nu=complex(NAN, NAN),
            error_deg=NAN,
            snr_db=NAN,
            candidate_index=-1,
            trials=0,
            utility=NAN,
            outer_radius=NAN,
            forbidden_radius=NAN,
            center=complex(NAN, NAN)
        )


@dataclass
class SweepRecord:
    sweep_name: str
    sweep_value: float
    err_proposed_deg: float
    err_exhaustive_deg: float
    err_maxinner_deg: float
    nu_proposed_re: float
    nu_proposed_im: float
    snr_achieved_db: float
    candidate_index: int
    trials: int
    method: str
    nu_re: float
    nu_im: float
    utility: float
    outer_radius: float
    forbidden_radius: float
    center_re: float
    center_im: float
    feasible: bool


def point_config(spec: ExperimentSpec, value: float) -> ScenarioConfig:
    """Scenario of one sweep point; raises ValueError for invalid geometry or sizes"""
    base = spec.base
    x, y, z = base.pos_is
    if spec.sweep == "is_location_y":
        config = base.with_updates(pos_is=(x, value, z))
    elif spec.sweep == "is_location_x":
        config = base.with_updates(pos_is=(value, y, z))
    elif spec.sweep == "ny":
        if not float(value).is_integer():
            raise ValueError(f"N_y must be an integer, got {value}")
        config = base.with_updates(ny=int(value))
    elif spec.sweep == "snr_enhancement_db":
        return base.with_snr_enhancement(value)
    else:
        raise ValueError(f"Unknown sweep: {spec.sweep}")

    if spec.snr_enhancement_db is not None:
        config = config.with_snr_enhancement(spec.snr_enhancement_db)
    return config


class ExperimentRunner:
    def __init__(
        self,
        grid_step_deg: float = DEFAULT_GRID_STEP_DEG,
        exhaustive_radial_steps: int = EXHAUSTIVE_RADIAL_STEPS,
        exhaustive_angular_steps: int = EXHAUSTIVE_ANGULAR_STEPS
    ):
        self.grid_step = float(np.deg2rad(grid_step_deg))
        self.radial_steps = exhaustive_radial_steps
        self.angular_steps = exhaustive_angular_steps

    @classmethod
    def from_spec(cls, spec: ExperimentSpec) -> "ExperimentRunner":
        return cls(spec.grid_step_deg, spec.exhaustive_radial_steps, spec.exhaustive_angular_steps)

    def run_point(
        self,
        config: ScenarioConfig,
        method: Method,
        estimator: Estimator = "asymptotic",
        trials: int = 1,
        seed: int = DEFAULT_SEED,
        point_index: int = 0
    ) -> PointResult:
        """
        Solve one scenario with one method and score the resulting surface

        Args:
            config: Scenario of the point
            method: 'proposed', 'exhaustive' or 'maxinner'
            estimator: 'asymptotic' (large-block limit) or 'monte-carlo'
            trials: Echo blocks averaged by the Monte Carlo estimator
            seed: Base seed; trials use (seed, point_index, trial)
            point_index: Position of the point in its sweep

        Returns:
            PointResult, or an infeasibility sentinel when the SNR floor is unreachable
        """
        channels = derive_channels(config)
        problem = build_problem(channels, config, channels.psi4_aoa)

        try:
            solution = self._solve(method, channels, config, problem)
        except InfeasibleScenarioError as e:
            logger.warning(f"Infeasible point for {method}: {str(e)}", {"point": point_index})
            return PointResult.infeasible(method)

        theta = recover_phases(solution.nu, channels, config)

        if estimator == "asymptotic":
            error = angle_error_deg(asymptotic_aoa(channels, solution.nu, self.grid_step), channels.psi4_aoa)
            used_trials = 1
        elif estimator == "monte-carlo":
            summary = monte_carlo_aoa_error(channels, theta, config, trials, seed, self.grid_step, point_index)
            error = summary.mean_error_deg
            used_trials = summary.trials
        else:
            raise ValueError(f"Unknown estimator: {estimator}")

        return PointResult(
            method=method,
            feasible=True,
            nu=solution.nu,
            error_deg=error,
            snr_db=linear_to_db(user_snr(channels, solution.nu, config)),
            candidate_index=solution.candidate_index,
            trials=used_trials,
            utility=objective_quadratic(solution.nu, problem),
            outer_radius=problem.outer_radius,
            forbidden_radius=problem.forbidden_radius,
            center=complex(problem.center)
        )

    def _solve(self, method: Method, channels, config: ScenarioConfig, problem) -> NuSolution:
        if method == "proposed":
            return solve_min(problem)
        if method == "maxinner":
            return solve_max(build_problem(channels, config, channels.psi5_aoa))
        if method == "exhaustive":
            inner_problem = build_problem(channels, config, channels.psi5_aoa)
            # Seed the grid with the closed-form points of both problems
            seeds = [solve_min(problem).nu, solve_max(inner_problem).nu]
            for candidate_problem in (problem, inner_problem):
                try:
                    seeds.extend(nu for _, nu in enumerate_candidates(candidate_problem))
                except DegenerateObjectiveError:
                    pass
            return brute_force_nu(
                problem,
                mode="max-aoa-error",
                channels=channels,
                radial_steps=self.radial_steps,
                angular_steps=self.angular_steps,
                grid_step=self.grid_step,
                extra_points=seeds
            )
        raise ValueError(f"Unknown method: {method}")

    def run_sweep_point(self, spec: ExperimentSpec, index: int) -> List[SweepRecord]:
        value = spec.values[index]
        try:
            config = point_config(spec, value)
        except ValueError as e:
            logger.warning(f"Invalid sweep point: {str(e)}", {"sweep": spec.sweep, "value": value})
            results = [PointResult.infeasible(method) for method in spec.methods]
        else:
            results = [
                self.run_point(config, method, spec.estimator, spec.trials, spec.seed, index)
                for method in spec.methods
            ]
        return build_records(spec.sweep, value, results)

    def run_sweep(self, spec: ExperimentSpec) -> List[SweepRecord]:
        """
        Run every sweep value with every requested method

        Args:
            spec: Experiment description

        Returns:
            One SweepRecord per (value, method) in sweep order, independent of worker count
        """
        logger.info("Starting sweep", {"sweep": spec.sweep, "points": len(spec.values), "workers": spec.workers})
        indices = range(len(spec.values))

        if spec.workers > 1:
            with ProcessPoolExecutor(max_workers=spec.workers) as executor:
                per_point = list(executor.map(self.run_sweep_point, [spec] * len(indices), indices))
        else:
            per_point = [self.run_sweep_point(spec, index) for index in indices]

        records = [record for point_records in per_point for record in point_records]
        infeasible = sum(1 for record in records if not record.feasible)
        logger.info("Sweep finished", {"sweep": spec.sweep, "records": len(records), "infeasible": infeasible})
        return records


def build_records(sweep_name: str, value: float, results: Sequence[PointResult]) -> List[SweepRecord]:
    errors: Dict[str, float] = {result.method: result.error_deg for result in results}
    proposed = next((result for result in results if result.method == "proposed"), None)
    proposed_nu = proposed.nu if proposed is not None else complex(NAN, NAN)

    return [
        SweepRecord(
            sweep_name=sweep_name,
            sweep_value=float(value),
            err_proposed_deg=errors.get("proposed", NAN),
            err_exhaustive_deg=errors.get("exhaustive", NAN),
            err_maxinner_deg=errors.get("maxinner", NAN),
            nu_proposed_re=proposed_nu.real,
            nu_proposed_im=proposed_nu.imag,
            snr_achieved_db=result.snr_db,
            candidate_index=result.candidate_index,
            trials=result.trials,
            method=result.method,
            nu_re=result.nu.real,
            nu_im=result.nu.imag,
            utility=result.utility,
            outer_radius=result.outer_radius,
            forbidden_radius=result.forbidden_radius,
            center_re=result.center.real,
            center_im=result.center.imag,
            feasible=result.feasible
        )
        for result in results
    ]
