import numpy as np
import pytest

from src.models.config import Tolerances
from src.models.matrix import save_matrix
from src.services.check_service import CheckService
from src.services.davis_service import DavisService
from src.services.decomposition_service import DecompositionService
from src.services.gallery_service import GalleryService
from src.services.geodesic_service import GeodesicService
from src.services.orbit_service import OrbitService
from src.services.spectral_service import SpectralService


@pytest.fixture
def tolerances():
    return Tolerances()


@pytest.fixture
def spectral(tolerances):
    return SpectralService(tolerances)


@pytest.fixture
def decomposition(tolerances):
    return DecompositionService(tolerances)


@pytest.fixture
def davis(tolerances):
    return DavisService(tolerances)


@pytest.fixture
def orbit(tolerances):
    return OrbitService(tolerances)


@pytest.fixture
def geodesics(tolerances):
    return GeodesicService(tolerances)


@pytest.fixture
def gallery(tolerances):
    return GalleryService(tolerances)


@pytest.fixture
def checks(tolerances):
    return CheckService(tolerances)


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture
def theta_pair(gallery):
    return gallery.theta_pair


@pytest.fixture
def write_pair(tmp_path):
    """Save P and Q as matrix files and return their paths as strings."""

    def write(P, Q, prefix='pair'):
        p_path, q_path = tmp_path / f'{prefix}_P.json', tmp_path / f'{prefix}_Q.json'
        save_matrix(P, p_path)
        save_matrix(Q, q_path)
        return str(p_path), str(q_path)

    return write
