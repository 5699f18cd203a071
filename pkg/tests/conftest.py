import math
from pathlib import Path

import numpy as np
import pytest

from kirchheat import Domain, ModalState, build_basis, load_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def basis_pi_8():
    return build_basis(Domain.interval(math.pi), 8)


@pytest.fixture(scope="session")
def default_config():
    return load_config(CONFIG_DIR / "default.json")


def random_state(basis, rng, scale=1.0, t=0.0):
    n = basis.n_modes
    return ModalState(t=t, h=scale * rng.standard_normal(n),
                      v=scale * rng.standard_normal(n),
                      c=scale * rng.standard_normal(n))


def make_rng(seed):
    return np.random.default_rng(seed)
