import os

DEFAULT_TOL = 1e-9
ENV_VAR = "REEBMAPPER_TOL"


def tol() -> float:
    """Absolute slack required before an open-set intersection counts as nonempty."""
    raw = os.environ.get(ENV_VAR)
    if raw is None or raw == "":
        return DEFAULT_TOL
    value = float(raw)
    if not value >= 0.0:
        raise ValueError(f"{ENV_VAR} must be a non-negative number, got {raw!r}")
    return value
