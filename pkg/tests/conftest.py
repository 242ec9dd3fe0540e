import json

import pytest

from qonion.scheme import action_table_from_dict, bundled_action_table

PAPER_CYCLES = {
    "a": [1, 213, 193, 236, 209, 248, 12, 182, 307, 116, 223],
    "b": [1, 12, 213, 182, 193, 307, 236, 116, 209, 223, 248],
    "c": [1, 116, 182, 248, 236, 213, 223, 307, 12, 209, 193],
    "d": [1, 236, 12, 116, 213, 209, 182, 223, 193, 248, 307],
    "e": [1, 209, 307, 213, 248, 116, 193, 12, 223, 236, 182],
}

PAPER_J_SET = {307, 248, 236, 223, 213, 209, 193, 182, 116, 12, 1}


@pytest.fixture(scope="session")
def table():
    return bundled_action_table()


@pytest.fixture
def fixture_file(tmp_path):
    """A fresh on-disk copy of the bundled fixture."""
    path = tmp_path / "fixture.json"
    path.write_text(json.dumps({
        "discriminant": -167, "p": 311, "j0": 1, "cycles": PAPER_CYCLES,
    }))
    return path


@pytest.fixture
def trivial_table():
    """Three actors whose cycles are the one-point cycle at j0 (identity action)."""
    return action_table_from_dict({
        "discriminant": -3, "p": 11, "j0": 1,
        "cycles": {"x": [1], "y": [1], "z": [1]},
    })
