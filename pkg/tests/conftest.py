from __future__ import annotations

from pathlib import Path

import pytest

from loopver.corpus import NAMES, source
from loopver.frontend import load

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def mutant():
    def read(name: str) -> str:
        return (DATA / name).read_text()
    return read


@pytest.fixture(scope="session")
def corpus():
    return {name: load(source(name)) for name in NAMES}


@pytest.fixture
def listing1(corpus):
    return corpus["listing1"]


@pytest.fixture
def listing2(corpus):
    return corpus["listing2"]


@pytest.fixture
def listing3(corpus):
    return corpus["listing3"]
