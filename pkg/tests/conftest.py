import numpy as np
import pytest

from frontlab.lattice_sim import SimParams, run_with_snapshots
from frontlab.solvable import SolvableIC, ode_front
from frontlab.wave import phi, solve_wave

LATTICE_A = 0.1
LATTICE_B = 0.002
LATTICE_ALPHAS = (0.01, 0.3, 0.5, 0.7, 0.99)
SNAPSHOT_TIMES = (250.0, 500.0, 1000.0, 2000.0)


@pytest.fixture(scope="session")
def wave_default():
    return solve_wave()


@pytest.fixture(scope="session")
def phi_default(wave_default):
    return phi(wave_default)


@pytest.fixture(scope="session")
def lattice_params():
    # 20 units past the last snapshot so the smoothed rate estimate has
    # full window coverage at t = 2000
    return SimParams(a=LATTICE_A, b=LATTICE_B, t_max=2020.0, alphas=LATTICE_ALPHAS)


@pytest.fixture(scope="session")
def lattice_run(lattice_params):
    """Shared t=2000 front simulation (a few minutes of wall time)."""
    traces, snapshots = run_with_snapshots(lattice_params, SNAPSHOT_TIMES)
    return traces, snapshots


@pytest.fixture(scope="session")
def solvable_run_10k():
    """Shared reach-time integration out to x = 10^4 (a few minutes)."""
    return ode_front(SolvableIC.zero(), a=1.0, x_max=10000, dt=5e-4)
