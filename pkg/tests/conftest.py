import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from src.backward_exponent import BackwardExponent  # noqa: E402
from src.levy_models import ExponentialJumps, Linnik, Stable, TruncatedStable  # noqa: E402
from src.transform_engine import GridSpec, w_derivatives  # noqa: E402

R = 0.2


@pytest.fixture
def r():
    return R


@pytest.fixture
def exp_model():
    """eta/r = 2, delta = 1: W is the Gamma(2, 1) distribution function."""
    return ExponentialJumps(eta=0.4, delta=1.0)


@pytest.fixture
def ts_model():
    return TruncatedStable(C=1.0, A=1.0, alpha=0.5)


@pytest.fixture
def stable_model():
    return Stable(alpha=0.5)


@pytest.fixture
def linnik_model():
    return Linnik(eta=0.4, delta=1.0, alpha=0.5)


@pytest.fixture
def grid():
    return GridSpec()


@pytest.fixture(scope="session")
def exp_wf():
    be = BackwardExponent(ExponentialJumps(eta=0.4, delta=1.0), R)
    return w_derivatives(be, GridSpec(), 0)


@pytest.fixture(scope="session")
def exp_wf_long():
    """Same model on a grid long enough for Laplace identities at beta >= 1."""
    be = BackwardExponent(ExponentialJumps(eta=0.4, delta=1.0), R)
    return w_derivatives(be, GridSpec(M=150), 0)


@pytest.fixture(scope="session")
def stable_wf():
    be = BackwardExponent(Stable(alpha=0.5), R)
    return w_derivatives(be, GridSpec(M=150), 0)


@pytest.fixture(scope="session")
def ts_wf():
    be = BackwardExponent(TruncatedStable(C=1.0, A=1.0, alpha=0.5), R)
    return w_derivatives(be, GridSpec(), 15)
