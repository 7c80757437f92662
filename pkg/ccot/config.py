import os


def _floats(raw: str):
    return tuple(float(x) for x in raw.split(",") if x.strip())


# Sinkhorn
SINKHORN_TOL = float(os.getenv("CCOT_SINKHORN_TOL", "1e-9"))
SINKHORN_MAX_ITER = int(os.getenv("CCOT_SINKHORN_MAX_ITER", "10000"))
# log-domain auto mode kicks in above this value of lambda * max(M)
LOG_DOMAIN_TRIGGER = float(os.getenv("CCOT_LOG_DOMAIN_TRIGGER", "200"))
CHECK_EVERY = 10

# CCOT
N_SAMPLES = int(os.getenv("CCOT_SAMPLES", "500"))
MAX_EXTRA_SAMPLES = int(os.getenv("CCOT_MAX_EXTRA_SAMPLES", "1000"))
LAMBDA_GRID = _floats(os.getenv("CCOT_LAMBDA_GRID", "0.5,1,5,10,50"))
N_JOBS = int(os.getenv("CCOT_N_JOBS", "1"))

# CCOT-GW
GW_LAMBDA = float(os.getenv("CCOT_GW_LAMBDA", "10"))
GW_OUTER_ITER = int(os.getenv("CCOT_GW_OUTER_ITER", "50"))
GW_INNER_ITER = int(os.getenv("CCOT_GW_INNER_ITER", "20"))
GW_OBJECTIVE_TOL = 1e-8
EPS_R = float(os.getenv("CCOT_EPS_R", "0.5"))

# LBM presets (YAML), shipped at the repository root
PRESETS_DIR = os.getenv(
    "CCOT_PRESETS_DIR",
    os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "presets"),
)
