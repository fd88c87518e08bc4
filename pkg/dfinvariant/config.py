"""Runtime settings, read once from the environment (and an optional .env)."""

import os

from dotenv import load_dotenv

load_dotenv()


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        return default


WEYL_GROUP_CAP = _env_int("DF_WEYL_GROUP_CAP", 100_000)

# Vertex enumeration walks every n-subset of constraints
MAX_DIMENSION = _env_int("DF_MAX_DIMENSION", 4)
MAX_CONSTRAINTS = _env_int("DF_MAX_CONSTRAINTS", 30)

MC_SAMPLES = _env_int("DF_MC_SAMPLES", 1_000_000)
MC_SEED = _env_int("DF_MC_SEED", 0)
MC_BATCH = 200_000

IDENTITY_SEED = _env_int("DF_IDENTITY_SEED", 7)

LOG_LEVEL = os.environ.get("DF_LOG_LEVEL", "WARNING").upper()
