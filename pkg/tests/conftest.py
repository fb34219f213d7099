import random

import pytest

from heightlab.curves import WeierstrassCurve


def curve(*ainvs):
    return WeierstrassCurve.from_ainvs(ainvs)


@pytest.fixture(scope="session")
def e37():
    # rank 1, conductor 37, generator (0, 0)
    return curve(0, 0, 1, -1, 0)


@pytest.fixture(scope="session")
def e389():
    # rank 2, conductor 389, generators (0, 0) and (1, 0)
    return curve(0, 1, 1, -2, 0)


@pytest.fixture(scope="session")
def e5077():
    # rank 3, conductor 5077
    return curve(0, 0, 1, -7, 6)


@pytest.fixture(scope="session")
def e11():
    # rank 0, conductor 11, five-torsion, split node at 11
    return curve(0, -1, 1, -10, -20)


@pytest.fixture(scope="session")
def e_k2():
    # y^2 = x^3 + 2, additive reduction at 2 and 3
    return curve(0, 0, 0, 0, 2)


@pytest.fixture(scope="session")
def e_tors():
    # y^2 = x^3 - x, full rational two-torsion, cusp at 2
    return curve(0, 0, 0, -1, 0)


@pytest.fixture(scope="session")
def e_z6():
    # y^2 = x^3 + 1, cyclic torsion of order six
    return curve(0, 0, 0, 0, 1)


@pytest.fixture(scope="session")
def e_aux():
    # y^2 = x^3 + x^2 + x + 1, rank 1 with generator (0, 1)
    return curve(0, 1, 0, 1, 1)


@pytest.fixture()
def rng():
    return random.Random(1729)
