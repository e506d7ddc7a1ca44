"""
Environment configuration loader for wavelab.

Loads environment variables from a .env file and provides centralized
access to the process-level defaults (log level, worker count, output root).
Experiment parameters never come from the environment; they live in the
key=value config file.
"""

import os
from typing import Dict, Union

from dotenv import load_dotenv

# Load environment variables once at import time
load_dotenv()

MAX_DEFAULT_WORKERS = 8


def get_config() -> Dict[str, Union[str, int]]:
    """
    Centralized environment configuration.

    Returns:
        Dict with configuration values:
        - WAVELAB_LOG_LEVEL: logging level name (default: INFO)
        - WAVELAB_WORKERS: worker processes for Monte Carlo runs
          (default: CPU count, capped at 8)
        - WAVELAB_OUTPUT_DIR: root directory for run outputs (default: runs)
    """
    default_workers = min(os.cpu_count() or 1, MAX_DEFAULT_WORKERS)
    workers_raw = os.getenv("WAVELAB_WORKERS", "")
    try:
        workers = int(workers_raw) if workers_raw else default_workers
    except ValueError:
        workers = default_workers

    return {
        "WAVELAB_LOG_LEVEL": os.getenv("WAVELAB_LOG_LEVEL", "INFO").upper(),
        "WAVELAB_WORKERS": max(1, workers),
        "WAVELAB_OUTPUT_DIR": os.getenv("WAVELAB_OUTPUT_DIR", "runs"),
    }
