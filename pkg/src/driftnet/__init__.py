"""Drainage-network throughput simulator and verification harness."""

import os

# allow oversubscribed thread-invariance checks on small machines; must be
# set before numba is first imported
os.environ.setdefault("NUMBA_NUM_THREADS", "8")

__version__ = "0.1.0"
