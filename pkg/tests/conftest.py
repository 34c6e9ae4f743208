import pytest

from cgl.timestepper import run
from cgl.verify import bundled_config

BUNDLED = ("linear", "singular", "saturated")


@pytest.fixture(scope="session")
def bundled_runs():
    """Full-length bundled trajectories, shared by the certificate tests."""
    out = {}
    for name in BUNDLED:
        cfg = bundled_config(name)
        spec = cfg.operator_spec()
        traj = run(cfg.initial_field(), cfg.forcing, cfg.time, spec)
        assert traj.error is None, f"bundled run {name} aborted: {traj.error}"
        out[name] = (traj, spec, cfg)
    return out
