import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the brute module

from endorse_verify.experiments import reference_policy

REFERENCE_DOC = {
    "organizations": [
        {"id": "O1", "weight": 1, "refusal_prob": 0.07},
        {"id": "O2", "weight": 3, "refusal_prob": 0.01},
        {"id": "O3", "weight": 2, "refusal_prob": 0.02},
    ],
    "weight_threshold": 5,
    "probability_threshold": 0.95,
}

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def ref_policy():
    return reference_policy()


@pytest.fixture
def policy_file(tmp_path):
    """Factory writing a policy document to disk, defaulting to the reference."""

    def write(doc=None, name="policy.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(doc if doc is not None else REFERENCE_DOC), encoding="utf-8")
        return path

    return write
