import csv
import random

import numpy as np
import pytest

import oracles
from posterscore import analysis
from posterscore.errors import EmptyOriginal
from posterscore.scores import SOURCES, SUB_DIMENSIONS, AnnotationRecord, Dimension, ScoreVector, SourceKind
from posterscore.synth import independent_records, planted_bottleneck_records


def rec(id_, o, b, t, l, ov=3.0, source=SourceKind.MERCHANT_HQ, cot=None):
    return AnnotationRecord(id_, source, ScoreVector(o, b, t, l, ov), {}, cot)


def random_records(n, seed):
    rng = random.Random(seed)
    return [
        AnnotationRecord(
            f"r{i}",
            rng.choice(SOURCES),
            ScoreVector(*(round(rng.uniform(1, 5), 1) for _ in range(5))),
            {},
            "x" * rng.randint(0, 50) if rng.random() < 0.8 else None,
        )
        for i in range(n)
    ]


def test_collinear_matrix():
    recs = [rec(str(i), v, v, v, v) for i, v in enumerate([1.0, 2.5, 3.0, 4.2, 5.0])]
    m = analysis.correlation_matrix(recs)
    for row in m.values:
        assert row == pytest.approx((1.0, 1.0, 1.0, 1.0))
    assert m.mean_offdiag == pytest.approx(1.0)


def test_matrix_symmetric_unit_diagonal_and_oracle():
    recs = random_records(150, 1)
    m = analysis.correlation_matrix(recs)
    for i in range(4):
        assert m.values[i][i] == 1.0
        for j in range(4):
            assert m.values[i][j] == m.values[j][i]
            xi = [r.scores[SUB_DIMENSIONS[i]] for r in recs]
            xj = [r.scores[SUB_DIMENSIONS[j]] for r in recs]
            if i != j:
                assert m.values[i][j] == pytest.approx(oracles.pearson(xi, xj), abs=1e-9)
    upper = [m.values[i][j] for i in range(4) for j in range(i + 1, 4)]
    assert m.mean_offdiag == pytest.approx(sum(upper) / 6, abs=1e-12)


def test_matrix_constant_dimension_flagged():
    recs = [rec(str(i), v, 3.0, 5 - v / 2, v / 2 + 1) for i, v in enumerate([1.0, 2.0, 4.0, 5.0])]
    m = analysis.correlation_matrix(recs)
    assert m[Dimension.BACKGROUND, Dimension.OBJECT] is None
    assert len(m.undefined_pairs) == 3
    assert m.mean_offdiag == pytest.approx((-1.0 - 1.0 + 1.0) / 3)


def test_independent_dimensions_uncorrelated():
    m = analysis.correlation_matrix(independent_records(10_000, seed=4))
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(m.values[i][j]) < 0.05


def test_weakest_link_examples():
    report = analysis.weakest_link([rec("a", 3.5, 4.0, 2.5, 3.2)])
    assert report.flagged == 1 and report.counts[Dimension.TEXT] == 1
    report = analysis.weakest_link([rec("b", 3.0, 3.0, 4.0, 5.0, ov=1.0)])
    assert report.flagged == 0 and report.percentages[Dimension.TEXT] == 0.0
    report = analysis.weakest_link([rec("c", 2.0, 4.0, 2.0, 4.0)])
    assert report.counts[Dimension.OBJECT] == 1 and report.ties == 1 and report.tie_ids == ("c",)


def test_weakest_link_percentages_sum_to_100():
    report = analysis.weakest_link(random_records(200, 2))
    assert report.flagged > 0
    assert sum(report.percentages.values()) == pytest.approx(100.0, abs=0.1)


def test_planted_bottleneck_recovered():
    report = analysis.weakest_link(planted_bottleneck_records(2000, 0.448, seed=1))
    assert report.flagged == 2000
    assert report.percentages[Dimension.TEXT] == pytest.approx(44.8, abs=1e-9)


def test_distribution_identical_and_two_point():
    recs = [rec(str(i), 3, 3, 3, 3, ov=3.3) for i in range(5)]
    s = analysis.score_distribution(recs, Dimension.OVERALL, bins=8)
    assert sum(1 for c in s.counts if c) == 1 and s.std == 0.0 and s.mean == pytest.approx(3.3)
    recs = [rec(str(i), 3, 3, 3, 3, ov=v) for i, v in enumerate([2.0, 4.5, 2.0])]
    s = analysis.score_distribution(recs, Dimension.OVERALL, bins=8)
    assert sum(1 for c in s.counts if c) == 2 and sum(s.counts) == 3


def test_distribution_closed_upper_edge():
    s = analysis.score_distribution([rec("a", 5, 5, 5, 5, ov=5.0), rec("b", 1, 1, 1, 1, ov=1.0)], Dimension.OVERALL, 4)
    assert s.counts == (1, 0, 0, 1)
    assert s.edges == (1.0, 2.0, 3.0, 4.0, 5.0)


def test_distribution_uniform_bins():
    rng = np.random.default_rng(9)
    recs = [rec(str(i), 3, 3, 3, 3, ov=float(v)) for i, v in enumerate(rng.uniform(1, 5, size=80_000))]
    s = analysis.score_distribution(recs, Dimension.OVERALL, bins=8)
    for c in s.counts:
        assert abs(100.0 * c / 80_000 - 12.5) < 1.0


def test_distribution_matches_bruteforce():
    recs = random_records(200, 3)
    s = analysis.score_distribution(recs, Dimension.TEXT, bins=8)
    vals = [r.scores.text for r in recs]
    assert sum(s.counts) == len(vals)
    assert s.mean == pytest.approx(sum(vals) / len(vals), abs=1e-9)
    mu = sum(vals) / len(vals)
    assert s.std == pytest.approx((sum((v - mu) ** 2 for v in vals) / len(vals)) ** 0.5, abs=1e-9)
    srt = sorted(vals)
    assert s.median == pytest.approx((srt[99] + srt[100]) / 2)


def test_cot_length_distribution():
    s = analysis.cot_length_distribution([rec("a", 3, 3, 3, 3, cot="x" * 10), rec("b", 3, 3, 3, 3)], bins=2)
    assert s.n == 1 and s.mean == 10.0


def test_cot_edit_rate():
    assert analysis.cot_edit_rate("原始文本", "原始文本") == 0.0
    assert analysis.cot_edit_rate("a" * 100, "b" * 32 + "a" * 68) == pytest.approx(32.0)
    assert analysis.cot_edit_rate("ab", "abcdef") == pytest.approx(200.0)
    with pytest.raises(EmptyOriginal):
        analysis.cot_edit_rate("", "x")


def test_per_source_means():
    single = rec("a", 1, 2, 3, 4, ov=5)
    m = analysis.per_source_means([single])
    assert [m.means[SourceKind.MERCHANT_HQ][d] for d in Dimension] == single.scores.as_list()
    assert len(m.missing) == 5
    two = analysis.per_source_means([rec("a", 3, 3, 3, 3, ov=2.0), rec("b", 3, 3, 3, 3, ov=4.0)])
    assert two.means[SourceKind.MERCHANT_HQ][Dimension.OVERALL] == 3.0


def test_per_source_means_groupby_oracle():
    recs = random_records(200, 4)
    m = analysis.per_source_means(recs)
    for src in SOURCES:
        group = [r for r in recs if r.source == src]
        if not group:
            assert src in m.missing
            continue
        for d in Dimension:
            total = 0.0
            for r in group:
                total += r.scores[d]
            assert m.means[src][d] == pytest.approx(total / len(group), abs=1e-9)


def test_csv_writers(tmp_path):
    recs = random_records(50, 5)
    analysis.write_matrix_csv(tmp_path / "m.csv", analysis.correlation_matrix(recs))
    analysis.write_histogram_csv(tmp_path / "h.csv", analysis.score_distribution(recs, Dimension.TEXT, 4))
    analysis.write_source_means_csv(tmp_path / "s.csv", analysis.per_source_means(recs))
    rows = list(csv.reader(open(tmp_path / "m.csv")))
    assert rows[0] == ["dimension", "object", "background", "text", "layout"] and len(rows) == 5
    hist = list(csv.DictReader(open(tmp_path / "h.csv")))
    assert sum(int(r["count"]) for r in hist) == 50
