import os

# Where run/simulate/bench write their files
OUTPUT_DIR = os.getenv("CCOT_OUTPUT_DIR", "results")

# Method used when --method is not given: "ccot" | "ccot-gw"
DEFAULT_METHOD = os.getenv("CCOT_METHOD", "ccot")

LOG_LEVEL = os.getenv("CCOT_LOG_LEVEL", "INFO").upper()

# Debug mode: full tracebacks on errors
DEBUG = os.getenv("DEBUG", "false").lower() == "true"
