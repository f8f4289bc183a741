from __future__ import annotations

import pytest

from mvtgg.fixtures import ast2cd, ast2cd_ambiguous, diamond_history, example_graph


@pytest.fixture(scope="session")
def tgg():
    return ast2cd()


@pytest.fixture(scope="session")
def ambiguous():
    return ast2cd_ambiguous()


@pytest.fixture(scope="session")
def rules(tgg):
    return tgg.forward_rules()


@pytest.fixture
def fig1(tgg):
    """Source graph: classes A and B, A declares f whose type access refers to B."""
    return example_graph(tgg.types.source)


@pytest.fixture
def diamond(tgg):
    return diamond_history(tgg.types.source)
