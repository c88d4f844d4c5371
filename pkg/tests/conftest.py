import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import build_support_figure, build_vote_figure, build_walkthrough


@pytest.fixture(scope="session")
def walkthrough():
    """15-node staged-growth instance: (graph, ground truth)."""
    return build_walkthrough()


@pytest.fixture(scope="session")
def support_figure():
    """Support-counting instance with family {3, 4}: (graph, ground truth)."""
    return build_support_figure()


@pytest.fixture(scope="session")
def vote_figure():
    """Voting instance with family {1, 3, 5}: (graph, ground truth)."""
    return build_vote_figure()
