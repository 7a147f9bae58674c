"""
Configuration constants for the double Jaynes-Cummings entanglement simulator.
"""

from pathlib import Path

PACKAGE_NAME = "jcsim"
PACKAGE_VERSION = "0.3.0"

# Project paths
PROJECT_ROOT = Path(__file__).parent
OUTPUT_DIR = PROJECT_ROOT / "output"
CONFIG_DIR = PROJECT_ROOT / "configs"

# Operator and state validation
HERMITICITY_TOL = 1e-12          # relative, ||H - H^dag||_max <= tol * ||H||_max
STATE_HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
EIGENVALUE_TOL = -1e-8
COMMUTATOR_TOL = 1e-12

# Integrator
INTEGRATOR_METHOD = "DOP853"      # embedded Runge-Kutta 8(5,3)
RTOL = 1e-8
ATOL = 1e-10
EVOLVE_TRACE_TOL = 1e-7
EVOLVE_EIGENVALUE_TOL = -1e-7

# Fock truncation
TAIL_LEVELS = 2                   # highest Fock levels counted as tail
TAIL_TOLERANCE = 1e-6
DRIVEN_CUTOFF = 8                 # default for driven / thermal scenarios
CUTOFF_ESCALATION = 2             # factor applied once when the tail check trips
MAX_CUTOFF = 64

# Matrix-exponential propagation
ORACLE_MAX_DIM = 64
PAIR_STEPPER_MAX_DIM = 32        # pair dimension up to which pairs are stepped with expm(L dt)

# Entanglement sudden death detection
ESD_THRESHOLD = 1e-6
ESD_PERSISTENCE = 3               # samples the new state must persist
MIN_EVENT_SAMPLES = 5
CONCURRENCE_CEILING = 1 + 1e-9

# Scenario defaults (ħ = 1, frequencies and rates in units of G_B)
DEFAULT_ALPHA = "pi/6"
DEFAULT_T_END = 5.0               # scaled time G_B t / 2π
DEFAULT_SAMPLES = 1001
DRIVEN_SAMPLES = 25001            # pump-induced dead intervals span ~1e-3 scaled time
DEFAULT_NOISE_RATE = 0.05         # documented default
DEFAULT_THERMAL_NTH = 0.5
DEFAULT_REALIZATIONS = 1000
DEFAULT_UNIFORM_WIDTH = 0.5
DEFAULT_GAUSSIAN_WIDTH = 0.25
DEFAULT_SEED = 20240611

# Parallel execution
WORKERS_ENV_VAR = "JCSIM_WORKERS"
DEFAULT_WORKERS = 1

# Output files
FLOAT_FORMAT = "%.17g"
TRACE_SUFFIX = "_trace.csv"
EVENTS_SUFFIX = "_events.csv"
MANIFEST_SUFFIX = "_manifest.json"
TRACE_JSON_SUFFIX = "_trace.json"

# Logging Configuration
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVEL = "INFO"
LOG_LEVEL_ENV_VAR = "JCSIM_LOG_LEVEL"
