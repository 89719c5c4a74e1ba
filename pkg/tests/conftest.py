from __future__ import annotations

import pytest

from fixture_data import populate_demo_cache


@pytest.fixture
def demo_cache(tmp_path):
    """A response cache pre-populated with the demo repository's recordings."""
    return populate_demo_cache(tmp_path / "cache")
