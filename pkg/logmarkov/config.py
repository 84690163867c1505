"""Numerical tolerances, enumeration caps and runtime knobs."""

import os

NORM_TOL = 1e-12
SMIP_TOL = 1e-12
NEG_PROB_TOL = 1e-10
EIGVEC_TOL = 1e-10

MAX_NS = 12
MAX_NO = 20
MAX_DENSE_QUBITS = 3
MAX_TRANSFER_DIM = 4096
MAX_ENUMERATION = 2 ** 24
MAX_TABLE_CELLS = 2 ** 26
MAX_JOINT_STATES = 10 ** 6

POWER_ITER_TOL = 1e-10
POWER_ITER_MAX = 10_000

EPS1_LIMIT = 1 / 64
OPNORM_LIMIT = 1 / 4
EPS_WINDOW_FLOOR = 1e-9

DEFAULT_SEED = 20240101
SHARD_SIZE = 8192
DEFAULT_KMIN = 1
DEFAULT_KMAX = 30
DEFAULT_SHOTS = 100_000

THREADS_ENV = 'LOGMARKOV_THREADS'


def max_workers(override: int | None = None) -> int:
    """Return the worker cap for thread pools.

    Args:
        override: Explicit value, typically from a CLI flag.

    Returns:
        ``override`` if given, else ``$LOGMARKOV_THREADS``, else the CPU count.
    """
    if override is not None:
        return max(1, override)
    env = os.getenv(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
