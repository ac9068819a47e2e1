"""Configuration settings for dualflow."""

import os

from dotenv import load_dotenv

load_dotenv()

# Environment settings
OUTPUT_ROOT = os.getenv("DUALFLOW_OUTPUT_ROOT", "runs")
LOG_LEVEL = os.getenv("DUALFLOW_LOG_LEVEL", "WARNING")

# Domain of F
RHO_MIN = 1e-3
PSD_TOLERANCE = 1e-10

# Stencils: solver paths vs residual verification paths
SOLVER_STENCIL_ORDER = 2
VERIFY_STENCIL_ORDER = 4

# Dual solver defaults
MAX_ITERATIONS = 20000
GAP_REL_TOLERANCE = 1e-3
FEAS_ABS_TOLERANCE = 1e-4
POWER_ITERATIONS = 50
STEP_SAFETY = 0.95
CHECK_EVERY = 50

# Cellwise Newton iterations
NEWTON_MAX_ITERATIONS = 100
NEWTON_TOLERANCE = 1e-10

# Dafermos escalation
DAFERMOS_GAMMA_FACTOR = 4.0
DAFERMOS_GAMMA_CAP = 1e4
DAFERMOS_MARGIN = 1e-4

# Burgers envelope sampling
ENVELOPE_SAMPLES_PER_PERIOD = 4096
ENVELOPE_MAX_PERIODS = 7

# Output
CSV_SCHEMA_VERSION = 1
