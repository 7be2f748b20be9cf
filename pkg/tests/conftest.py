import numpy as np
import pytest

from app.repositories.run_repository import RunRepository
from app.schemas.grid import GridMode, GridSpec
from app.schemas.params import ProblemParams
from app.schemas.series import NormSeries
from app.services.decay_service import geometric_times
from app.services.suite_service import SuiteService


@pytest.fixture
def loss_params() -> ProblemParams:
    """(n, m, q, sigma1, sigma2, p1, p2) = (7, 1, 4, 1, 1, 9, 10): loss of decay with eps = 0."""
    return ProblemParams(n=7, sigma1=1, sigma2=1, p1=9, p2=10, q=4, m=1)


@pytest.fixture
def noloss_params() -> ProblemParams:
    return ProblemParams(n=7, sigma1=1, sigma2=1, p1=10, p2=10, q=4, m=1)


@pytest.fixture
def none_params() -> ProblemParams:
    return ProblemParams(n=8, sigma1=1, sigma2=1, p1=2, p2=2, q=2, m=1)


@pytest.fixture
def small_radial() -> GridSpec:
    return GridSpec(mode=GridMode.RADIAL, n=3, points=256, extent=60.0)


@pytest.fixture
def sample_times():
    return [0.0] + geometric_times(0.1, 100.0, 49)


@pytest.fixture
def power_series(sample_times):
    """Series whose columns are exact powers of (1+t)."""

    def build(**exponents: float) -> NormSeries:
        t = np.asarray(sample_times)
        return NormSeries.from_columns(t, {name: (1.0 + t) ** e for name, e in exponents.items()})

    return build


@pytest.fixture
def repository(tmp_path) -> RunRepository:
    return RunRepository(tmp_path / "runs")


@pytest.fixture
def service(repository) -> SuiteService:
    return SuiteService(repository)
