import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from posterscore.errors import LengthMismatch, NoRecords, SchemaError, ZeroVector
from posterscore.fidelity import FeatureRecord, cosine_sim, fidelity_row


def test_cosine_examples():
    assert cosine_sim([0.3, -1, 2], [0.3, -1, 2]) == pytest.approx(1.0)
    assert cosine_sim([1, 0], [0, 1]) == 0.0
    assert cosine_sim([1, 0], [1, 1]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    with pytest.raises(LengthMismatch):
        cosine_sim([1, 0], [1, 0, 0])
    with pytest.raises(ZeroVector):
        cosine_sim([0, 0], [1, 0])


vec = st.lists(st.floats(-10, 10), min_size=3, max_size=3).filter(lambda v: math.hypot(*v) > 1e-3)


@given(vec, vec, st.floats(0.01, 100))
def test_cosine_scale_invariant(a, b, c):
    assert cosine_sim([c * x for x in a], b) == pytest.approx(cosine_sim(a, b), abs=1e-9)


def rec(case, dref, dgen, lpips=None, model="m"):
    return FeatureRecord(case, model, tuple(dref), tuple(dgen), tuple(dref), tuple(dgen), lpips)


def test_row_identical():
    row = fidelity_row([rec("c", [1, 2], [1, 2], 0.0)])
    assert (row.dino_sim_mean, row.clip_score_mean, row.lpips_mean) == (pytest.approx(1.0), pytest.approx(1.0), 0.0)


def test_row_means_and_lpips_coverage():
    # cosines 0.6 and 0.8 against (1, 0)
    rows = [rec("a", [1, 0], [0.6, 0.8], 0.5), rec("b", [1, 0], [0.8, 0.6])]
    row = fidelity_row(rows)
    assert row.dino_sim_mean == pytest.approx(0.7, abs=1e-12)
    assert row.lpips_mean == 0.5 and row.lpips_coverage == 1
    assert fidelity_row([rows[1]]).lpips_mean is None


def test_row_errors():
    with pytest.raises(NoRecords):
        fidelity_row([])
    with pytest.raises(SchemaError):
        fidelity_row([rec("a", [1], [1]), rec("b", [1], [1], model="other")])


def test_from_dict():
    r = FeatureRecord.from_dict(
        {"case_id": 1, "model": "q", "dino_ref": [1, 0], "dino_gen": [1, 1], "clip_ref": [1], "clip_gen": [2], "lpips": 0.4}
    )
    assert r.case_id == "1" and r.lpips == 0.4
    with pytest.raises(SchemaError):
        FeatureRecord.from_dict({"case_id": 1, "model": "q", "dino_ref": [], "dino_gen": [1], "clip_ref": [1], "clip_gen": [2]})
    with pytest.raises(SchemaError):
        FeatureRecord.from_dict({"case_id": 1, "model": "q"})
