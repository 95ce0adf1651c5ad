import os

from dotenv import load_dotenv

load_dotenv()

# Attribute roles
ROLE_IDENTIFIER = "identifier"
ROLE_QUASI_IDENTIFIER = "quasi_identifier"
ROLE_CONFIDENTIAL = "confidential"

ROLES = (ROLE_IDENTIFIER, ROLE_QUASI_IDENTIFIER, ROLE_CONFIDENTIAL)

# Microaggregation methods
METHOD_MDAV = "mdav"
METHOD_INDIVIDUAL_SORTING = "individual_sorting"
METHOD_SINGLE_AXIS_ZSCORE = "single_axis_zscore"
METHOD_SINGLE_AXIS_PCA = "single_axis_pca"
METHOD_HM_PFSOM = "hm_pfsom"

METHODS = (
    METHOD_MDAV,
    METHOD_INDIVIDUAL_SORTING,
    METHOD_SINGLE_AXIS_ZSCORE,
    METHOD_SINGLE_AXIS_PCA,
    METHOD_HM_PFSOM,
)

# Single-axis scoring criteria
CRITERION_ZSCORE_SUM = "zscore_sum"
CRITERION_FIRST_PC = "first_pc"

# Normalization modes for constant columns
NORMALIZE_STRICT = "strict"
NORMALIZE_LENIENT = "lenient"

# Fuzzy-possibilistic clustering defaults
M_FUZZ = 2.0
ETA = 2.0
TOL = 1e-6
MAX_ITER = 300

# Distances below this are floored before ratio computations
DISTANCE_FLOOR = 1e-12

# Initialization strategies for cluster centers
INIT_FARTHEST = "farthest"
INIT_RANDOM = "random"

# Power-iteration / eigen tolerance for the first principal component
PC_TOL = 1e-10

# Seeds default to a constant so reproduction runs are deterministic
DEFAULT_SEED = int(os.getenv("ANON_SEED", "0"))

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Bounded worker pools
BENCH_WORKERS = int(os.getenv("BENCH_WORKERS", "4"))
CLUSTER_WORKERS = int(os.getenv("CLUSTER_WORKERS", "1"))

# GraphQL service port
PORT = int(os.getenv("PORT", "8000"))

# Floats are written with enough digits to round-trip
CSV_FLOAT_FORMAT = "%.17g"

# Sweep report column order
REPORT_COLUMNS = [
    "method",
    "k",
    "il",
    "il_normalized",
    "linked",
    "second_nearest",
    "expected_matches",
    "min_sse",
    "k_max",
    "wall_time_ms",
]

# Extra report columns appended after the stable ones
REPORT_EXTRA_COLUMNS = ["linked_pct", "diversity_ok", "qids", "error", "structure"]

# Per sub-microdata comparison report, hm_pfsom groups against MDAV on the same records
SUB_REPORT_COLUMNS = [
    "method",
    "k",
    "qids",
    "sub",
    "size",
    "cs",
    "algorithm",
    "k_used",
    "min_group_size",
    "groups",
    "min_sse",
    "il",
    "error",
]

REPORT_FORMATS = ("csv", "json")

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_METHOD = 3
