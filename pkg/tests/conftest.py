import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from posterscore.scores import ScoreVector  # noqa: E402

# one-decimal grid of the annotation protocol, [1.0, 5.0]
grid_scores = st.integers(10, 50).map(lambda i: i / 10)
any_scores = st.floats(1.0, 5.0, allow_nan=False)
grid_vectors = st.lists(grid_scores, min_size=5, max_size=5).map(ScoreVector.from_list)
any_vectors = st.lists(any_scores, min_size=5, max_size=5).map(ScoreVector.from_list)


@pytest.fixture
def fixture_dir(tmp_path):
    from posterscore.cli import main

    out = tmp_path / "fx"
    assert main(["synth", "--seed", "7", "--records", "60", "--cases", "8", "--out", str(out)]) == 0
    return out
