import os
import sys

import pytest

# flat layout: packages live next to main.py
ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from core.pomdp import example_pomdp, random_pomdp  # noqa: E402


@pytest.fixture
def example():
    return example_pomdp()


@pytest.fixture
def example_path():
    return os.path.join(ROOT, "data", "worked_example.json")


@pytest.fixture
def blind():
    return random_pomdp(3, 2, (3,), seed=7)


@pytest.fixture
def split():
    return random_pomdp(3, 2, (2, 1), seed=11)


@pytest.fixture
def observable():
    return random_pomdp(3, 2, (1, 1, 1), seed=5)
