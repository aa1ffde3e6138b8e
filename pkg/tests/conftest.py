import pytest

from destim import NetworkParams


@pytest.fixture
def p0():
    """Baseline parameter set used by the numerical studies; num_sensors
    varies per test."""

    def make(m: int = 100, **overrides) -> NetworkParams:
        values = dict(
            sigma_theta2=1.0,
            sigma_v2=0.2,
            sigma_n2=0.1,
            lam=2.0,
            num_sensors=m,
            power_budget=1.2,
        )
        values.update(overrides)
        return NetworkParams(**values)

    return make
