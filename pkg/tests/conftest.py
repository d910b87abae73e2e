import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nilkl import HermitianLieData, build_family, change_frame, random_two_step
from nilkl.catalog import random_unitary

settings.register_profile(
    "nilkl", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("nilkl")


def sl2c() -> HermitianLieData:
    """sl(2, C) with a complex-bilinear bracket (so D = 0); not nilpotent."""
    C = np.zeros((3, 3, 3), dtype=complex)
    C[1, 0, 1], C[1, 1, 0] = 2, -2
    C[2, 0, 2], C[2, 2, 0] = -2, 2
    C[0, 1, 2], C[0, 2, 1] = 1, -1
    return HermitianLieData(C, np.zeros_like(C), "sl2c")


def zoo() -> list[HermitianLieData]:
    """Valid structures outside the catalogue, used for identity checks."""
    one = np.zeros((1, 1, 1), dtype=complex)
    D1 = one.copy()
    D1[0, 0, 0] = 1 + 0.5j
    return [
        change_frame(random_two_step(4, 2, seed=11), random_unitary(4, seed=3)).with_label("rot(4,2)"),
        change_frame(random_two_step(3, 1, seed=5), random_unitary(3, seed=8)).with_label("rot(3,1)"),
        change_frame(sl2c(), random_unitary(3, seed=1)).with_label("rot-sl2c"),
        HermitianLieData(one, D1, "n1-solvable"),
        random_two_step(2, 1, seed=2),
        random_two_step(5, 3, seed=9, with_C=False),
        random_two_step(5, 2, seed=4, with_D=False),
    ]


def catalogue() -> list[HermitianLieData]:
    return [
        build_family("abelian", {"n": 3}),
        build_family("kodaira", {"lambda": 1.0}),
        build_family("kodaira", {"lambda": 2.5}),
        build_family("iwasawa"),
        build_family("cor12", {"n": 3, "lambda": 1.0, "a": 1.0}),
        build_family("cor12", {"n": 5, "variant": "b", "a": 0.7, "b": -1.3, "c": 0.4}),
        build_family("cor12", {"n": 6, "variant": "b", "a": 0.7, "b": -1.3, "c": 0.4, "x": 0.9}),
    ]


ALL = catalogue() + zoo()


@pytest.fixture(params=ALL, ids=lambda d: d.label or "?")
def structure(request) -> HermitianLieData:
    return request.param


@pytest.fixture
def kodaira():
    return build_family("kodaira", {"lambda": 1.0})


@pytest.fixture
def iwasawa():
    return build_family("iwasawa")
