import pytest

from services.adams_service import AdamsService, Context
from services.complex_service import ComplexService
from services.generator_service import GeneratorService
from services.homalg_service import HomalgService
from services.json_service import JSONService
from services.linalg_service import LinalgService
from services.q_service import QService
from services.spectral_service import SpectralService


@pytest.fixture
def ctx():
    return Context(3, 2)


@pytest.fixture
def linalg():
    return LinalgService()


@pytest.fixture
def adams():
    return AdamsService()


@pytest.fixture
def complexes():
    return ComplexService()


@pytest.fixture
def homalg():
    return HomalgService()


@pytest.fixture
def qs():
    return QService()


@pytest.fixture
def spectral():
    return SpectralService()


@pytest.fixture
def codec():
    return JSONService()


@pytest.fixture
def generator():
    return GeneratorService()
