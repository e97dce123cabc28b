from __future__ import annotations

import pytest
from hypothesis import settings

from bioamb import corpus

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture(scope="session")
def cell_mol():
    return corpus.load("cell_mol")


@pytest.fixture(scope="session")
def corpus_terms():
    return {name: corpus.load(name) for name in corpus.names()}
