import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DESK_SEED = 2024
DESK_SITES = 12
# union of the published sweep and the two extreme widths used by the crossover criterion
DESK_OMEGAS = (0.4, 0.5, 0.6, 0.8, 1.0, 1.4, 2.0, 3.0, 4.0, 5.0, 7.0, 8.0)

CRITERIA = []


def _workers():
    return int(os.environ.get("DELTAN_WORKERS", "1"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def record():
    """record(id, ok, detail): one pass/fail line per acceptance criterion."""
    def _record(cid, ok, detail):
        line = f"{cid} {'PASS' if ok else 'FAIL'}  {detail}"
        CRITERIA.append(line)
        print(line, flush=True)
        return ok
    return _record


@pytest.fixture(scope="session")
def desk_calibration():
    from deltan.crossover import StatsPlan, calibrate_beta
    from deltan.spinchain import build_basis, window_bounds
    plan = StatsPlan()
    lo, hi = window_bounds(build_basis(DESK_SITES, 0.0).dimension, plan.fraction)
    return calibrate_beta(plan.beta_grid, hi - lo, plan.calibration_realizations, DESK_SEED, plan.lam, _workers())


@pytest.fixture(scope="session")
def desk_sweep(desk_calibration):
    """L=12, M=200 chain points with matched beta-ensembles, keyed by omega."""
    from deltan.crossover import StatsPlan, crossover_sweep
    from deltan.spinchain import SpinChainConfig
    pts = crossover_sweep(SpinChainConfig(DESK_SITES, 1.0, seed=DESK_SEED), DESK_OMEGAS, StatsPlan(),
                          calibration=desk_calibration, workers=_workers())
    return {p.omega: p for p in pts}


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
