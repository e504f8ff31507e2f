import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hdg_voigt.manufactured import case_sinusoidal_2d
from hdg_voigt.mesh import structured_quad_mesh, structured_tri_mesh


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def sinusoidal():
    return case_sinusoidal_2d()


@pytest.fixture(params=["quad", "tri"])
def elem(request):
    return request.param


@pytest.fixture
def small_mesh(elem):
    return structured_quad_mesh(3) if elem == "quad" else structured_tri_mesh(3)


def polynomial_case(degree=1, nu=0.3, seed=7):
    """Manufactured case whose exact displacement is a fixed polynomial.

    Neumann data on the bottom edge, Dirichlet elsewhere.  With ``degree``
    not above the HDG degree the discrete solution should be exact.
    """
    from hdg_voigt.manufactured import ManufacturedCase
    from hdg_voigt.mesh import neumann_on_bottom
    from hdg_voigt.voigt import MaterialParams

    terms = [(i, j) for i in range(degree + 1) for j in range(degree + 1 - i)]
    C = np.random.default_rng(seed).normal(size=(2, len(terms)))

    def mono(x, i, j, dx=0, dy=0):
        if dx > i or dy > j:
            return np.zeros(x.shape[:-1])
        ci = np.prod(range(i - dx + 1, i + 1)) if dx else 1
        cj = np.prod(range(j - dy + 1, j + 1)) if dy else 1
        return ci * cj * x[..., 0] ** (i - dx) * x[..., 1] ** (j - dy)

    def field(x, dx=0, dy=0):
        x = np.asarray(x, dtype=float)
        return np.stack([sum(C[c, t] * mono(x, i, j, dx, dy) for t, (i, j) in enumerate(terms))
                         for c in range(2)], -1)

    def grad(x):
        return np.stack([field(x, 1, 0), field(x, 0, 1)], -1)

    def hess(x):
        row0 = np.stack([field(x, 2, 0), field(x, 1, 1)], -1)
        row1 = np.stack([field(x, 1, 1), field(x, 0, 2)], -1)
        return np.stack([row0, row1], -1)

    return ManufacturedCase(f"poly{degree}", MaterialParams(1.0, nu), field, grad, hess, neumann_on_bottom)


@pytest.fixture
def linear_case():
    return polynomial_case(1)
