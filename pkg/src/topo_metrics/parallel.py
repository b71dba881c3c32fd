import os

from .errors import BadParams

THREADS_ENV = "TOPO_METRICS_THREADS"


def worker_count() -> int:
    """Worker cap from ``TOPO_METRICS_THREADS``, defaulting to the core count."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise BadParams(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise BadParams(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value
