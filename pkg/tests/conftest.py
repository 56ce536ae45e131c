import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from nsbox.core import Setting, isotropic, pr_box, uniform

settings.register_profile(
    "nsbox", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("nsbox")

S2222 = Setting(2, 2, 2, 2)
S2233 = Setting(2, 2, 3, 3)


@pytest.fixture
def pr():
    return pr_box(S2222)


@pytest.fixture
def pr3():
    return pr_box(S2233, 3)


@pytest.fixture
def unif():
    return uniform(S2222)


@pytest.fixture
def iso():
    return lambda lam: isotropic(Fraction(lam))


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("NSBOX_CACHE_DIR", str(tmp_path / "cache"))
