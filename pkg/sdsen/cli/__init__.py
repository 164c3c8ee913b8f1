"""
Command-line entry point: ``sdsen gen-data | train | infer | eval | check``.
"""

import os

from dotenv import load_dotenv

load_dotenv()

# must be exported before numpy loads its BLAS
if os.getenv("SDSEN_NUM_THREADS") and not os.getenv("OMP_NUM_THREADS"):
    os.environ["OMP_NUM_THREADS"] = os.environ["SDSEN_NUM_THREADS"]
