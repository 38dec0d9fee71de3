import os
from dotenv import load_dotenv

# Every value below can be overridden from a .env file or the environment.
# Nothing is required: the fallbacks reproduce the documented defaults.

# Muat variabel dari file .env
load_dotenv()

# Reporting
PRECISION = int(os.getenv("MESHRING_PRECISION", "3"))
LOG_LEVEL = os.getenv("MESHRING_LOG_LEVEL", "WARNING")

# Exact engine
BUDGET = os.getenv("MESHRING_BUDGET", "default")
ENUMERATION_CAP = int(os.getenv("MESHRING_ENUMERATION_CAP", "1000000"))
CROSS_CHECK_PAIRS = int(os.getenv("MESHRING_CROSS_CHECK_PAIRS", "64"))
# Pairs inspected when predicting the determinant cost of a scenario
COST_SAMPLE_PAIRS = int(os.getenv("MESHRING_COST_SAMPLE_PAIRS", "4096"))

# Monte-Carlo
SAMPLES = int(os.getenv("MESHRING_SAMPLES", "100000"))
SEED = int(os.getenv("MESHRING_SEED", "1"))
WORKERS = int(os.getenv("MESHRING_WORKERS", "1"))
MC_BLOCK = int(os.getenv("MESHRING_MC_BLOCK", "2048"))

NAMED_BUDGETS = {
    "low": 1e6,
    "default": 2.5e8,
    "high": 1e11,
    "unlimited": float("inf"),
}


def resolve_budget(value) -> float:
    """Turns a budget name or number into an operation count."""
    if value is None:
        value = BUDGET
    if isinstance(value, (int, float)):
        return float(value)
    key = str(value).strip().lower()
    if key in NAMED_BUDGETS:
        return NAMED_BUDGETS[key]
    try:
        return float(key)
    except ValueError:
        raise ValueError(f"unknown budget '{value}' (use {', '.join(NAMED_BUDGETS)} or a number)")

# Auto engine switches from the determinant to the DP sweep above this many
# predicted determinant operations.
DET_BUDGET = float(os.getenv("MESHRING_DET_BUDGET", "5e7"))
