"""
Application configuration for the F-RAN energy toolkit
This module contains constants used in the application, such as default directories,
file names, solver tolerances and the default diurnal load anchors. These constants are
used throughout the project to ensure consistency and ease of maintenance; the scenario
JSON file overrides the ones that are exposed there.
"""

# Tool version, written into every metadata sidecar
TOOL_VERSION = "1.0.0"

# File paths
DATA_DIR = "./data"
OUTPUT_DIR = "./output"

# File names
DEFAULT_CONFIG_FILE = "default.json"
RESOLVED_CONFIG_FILE = "resolved_config.json"
LOAD_SWEEP_CSV = "load_sweep.csv"
LATENCY_SWEEP_CSV = "latency_sweep.csv"
ORACLE_CHECK_CSV = "oracle_check.csv"
FACTOR_SWEEP_CSV = "factor_sweep.csv"
METADATA_SUFFIX = ".meta.json"
LP_DUMP_FILE = "problem.lp"

# Result table layout
CSV_COLUMNS = ["key", "policy", "status", "total_w", "proc_w", "vm_w", "traffic_w", "bnb_nodes"]
FLOAT_FORMAT = "%.17g"

# Solver tolerances (all overridable from the "solver" config section)
FEASIBILITY_TOL = 1e-7
INTEGRALITY_TOL = 1e-6
GAP_TOL = 1e-9
PIVOT_TOL = 1e-11
DEFAULT_NODE_BUDGET = 20000
DEFAULT_WORKERS = 1
# Nodes drawn per branch-and-bound round; fixed so results do not depend on worker count
DEFAULT_BATCH_SIZE = 8
# "auto" backend switches to the sparse solver above this many tableau entries
DENSE_TABLEAU_LIMIT = 4_000_000
LP_BACKENDS = ("auto", "tableau", "highs")

# Formulation defaults
LATENCY_SLACK = 1e-9
RESPONSE_MULTIPLIER = 0.0

# Demand defaults
DEFAULT_SEED = 20190701
REQUESTS_PER_UD = 3

# Latency sweep defaults
GRID_POINTS = 16
PLATEAU_INDEX = 11
TIGHT_BOUND_MARGIN = 1.05

# Default synthetic diurnal profile: (hour, active fraction) anchors, linear in between
DEFAULT_PROFILE_ANCHORS = [
    (0, 0.35),
    (4, 0.10),
    (8, 0.45),
    (12, 0.70),
    (17, 0.80),
    (20, 1.00),
    (21, 1.00),
    (23, 0.55),
]

# Process exit codes
EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_CONFIG_ERROR = 2
EXIT_SOLVER_FAILURE = 3

# Logging format shared by the CLI
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Instance factors the factor sweep can scale
SWEEP_FACTORS = ("edge_capacity", "cpi", "link_capacity")
