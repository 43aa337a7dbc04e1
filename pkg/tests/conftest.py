import os
import sys
from importlib import resources

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from contractdiff.lang import parse  # noqa: E402


def seed_source(name: str) -> str:
    return resources.files("contractdiff.seeds").joinpath(f"{name}.msol").read_text()


def seed_tree(name: str):
    return parse(seed_source(name))


SEED_NAMES = sorted(
    p.name[:-5] for p in resources.files("contractdiff.seeds").iterdir() if p.name.endswith(".msol")
)


@pytest.fixture
def for_test():
    return seed_tree("forTest")
