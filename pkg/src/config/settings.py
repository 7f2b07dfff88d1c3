import os
from dotenv import load_dotenv

load_dotenv()

# Default scenario: DFBS, user and surface geometry in meters
DEFAULT_POS_DFBS = (10.0, 20.0, 0.0)
DEFAULT_POS_USER = (5.0, -5.0, 0.0)
DEFAULT_POS_IS = (0.0, 0.0, 0.0)

# Default radio settings
DEFAULT_M = 4
DEFAULT_NY = 30
DEFAULT_NZ = 10
DEFAULT_WAVELENGTH_M = 0.06
DEFAULT_SPACING_M = 0.03
DEFAULT_TX_POWER_DBM = 10.0
DEFAULT_NOISE_POWER_DBM = -110.0
DEFAULT_BLOCK_LENGTH = 1000

# Solver / estimator settings
FEASIBILITY_TOL = 1e-9
DEFAULT_GRID_STEP_DEG = float(os.getenv("GRID_STEP_DEG", "0.01"))
EXHAUSTIVE_RADIAL_STEPS = int(os.getenv("EXHAUSTIVE_RADIAL_STEPS", "30"))
EXHAUSTIVE_ANGULAR_STEPS = int(os.getenv("EXHAUSTIVE_ANGULAR_STEPS", "120"))
ESTIMATOR_CHUNK_SIZE = 256

# Run settings
DEFAULT_SEED = int(os.getenv("SIM_SEED", "0"))
DEFAULT_TRIALS = int(os.getenv("SIM_TRIALS", "100"))
SWEEP_WORKERS = int(os.getenv("SWEEP_WORKERS", "1"))

# Sweep axes
LOCATION_RANGE_M = (-20.0, 20.0)
LOCATION_STEPS = 41
NY_VALUES = (5, 10, 15, 20, 25, 30, 35, 40, 45, 50)
SNR_ENHANCEMENT_VALUES_DB = tuple(0.5 * k for k in range(13))
DEFAULT_SNR_ENHANCEMENT_DB = 0.0

# Logging
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s - %(message)s"
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
