import pytest
from hypothesis import settings

from core.algebra import WordAlgebra
from core.dynamics import DynamicsEngine
from core.group import EndoContext
from core.oracle import L2Oracle
from core.orthogonalizer import Orthogonalizer
from domain.entities import EndoSpec

settings.register_profile("repro", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repro")


def make_context(matrix, moduli=None, **kwargs) -> EndoContext:
    rank = len(matrix)
    spec = EndoSpec(
        rank=rank,
        matrix=tuple(tuple(row) for row in matrix),
        moduli=tuple(moduli) if moduli else (0,) * rank,
        **kwargs,
    )
    return EndoContext(spec)


@pytest.fixture(scope="session")
def times3() -> EndoContext:
    return make_context([[3]], declared_pure=True)


@pytest.fixture(scope="session")
def gaussian() -> EndoContext:
    return make_context([[1, 1], [-1, 1]])


@pytest.fixture(scope="session")
def double2() -> EndoContext:
    return make_context([[2, 0], [0, 2]])


@pytest.fixture(scope="session")
def identity_ctx() -> EndoContext:
    return make_context([[1]])


@pytest.fixture(scope="session")
def mixed() -> EndoContext:
    return make_context([[3, 0], [0, 1]], moduli=(0, 2), max_depth=12)


@pytest.fixture(scope="session")
def alg3(times3) -> WordAlgebra:
    return WordAlgebra(times3)


@pytest.fixture(scope="session")
def oracle3(alg3) -> L2Oracle:
    return L2Oracle(alg3)


@pytest.fixture(scope="session")
def ortho3(alg3) -> Orthogonalizer:
    return Orthogonalizer(alg3)


@pytest.fixture(scope="session")
def dyn3(alg3) -> DynamicsEngine:
    return DynamicsEngine(alg3)


@pytest.fixture
def g3(times3):
    """Rank-1 element constructor for the times-3 context"""
    return lambda v: times3.element((v,))
