import math
from fractions import Fraction

import numpy as np
import pytest

from data import Dataset, GbdtConfig, SelectorConfig, IV_LITERAL, IV_STANDARD_LOG
from engine import (iv_strength, correlation_strength, equal_frequency_bins, assign_bins, information_value, compute_ivs,
                    filter_by_iv, pearson, remove_redundant, rank_and_cap, run_cascade)


def test_equal_frequency_bins():
    column = np.arange(1.0, 11.0)
    edges = equal_frequency_bins(column, 2)
    assert list(edges) == [5.0]
    assert list(assign_bins(column, edges)) == [0] * 5 + [1] * 5

    assert equal_frequency_bins(np.full(7, 3.0), 10).size == 0

    ties = np.array([1.0, 1.0, 1.0, 2.0])
    edges = equal_frequency_bins(ties, 2)
    assert list(edges) == [1.0]
    assert np.bincount(assign_bins(ties, edges)).tolist() == [3, 1]

    with pytest.raises(ValueError):
        equal_frequency_bins(np.array([]), 2)
    with pytest.raises(ValueError):
        equal_frequency_bins(column, 1)


def test_information_value_hand_computed():
    column = np.array([0.0] * 10 + [1.0] * 10)
    labels = np.array([1, 1] + [0] * 8 + [1] * 8 + [0, 0])
    ## Smoothed shares: positives (2.5, 8.5) / 11, negatives (8.5, 2.5) / 11
    expected = 2 * (6 / 11) * math.log(8.5 / 2.5)
    assert information_value(column, labels, SelectorConfig(beta=2)) == pytest.approx(expected, abs=1e-12)

    literal = (6 / 11) * (8.5 / 2.5 - 2.5 / 8.5)
    assert information_value(column, labels, SelectorConfig(beta=2, iv_formula=IV_LITERAL)) == pytest.approx(literal, abs=1e-12)


def test_information_value_of_label_independent_feature_is_zero():
    column = np.array([0.0, 0.0, 1.0, 1.0])
    labels = np.array([0, 1, 0, 1])
    assert information_value(column, labels, SelectorConfig(beta=2)) == pytest.approx(0.0, abs=1e-15)
    assert information_value(column, labels, SelectorConfig(beta=2, iv_formula=IV_LITERAL)) == pytest.approx(0.0, abs=1e-15)


def test_information_value_errors():
    with pytest.raises(ValueError, match="both label classes"):
        information_value(np.arange(3.0), np.array([1, 1, 1]))
    with pytest.raises(ValueError, match="length"):
        information_value(np.arange(3.0), np.array([0, 1]))


def brute_force_iv(column:list[float], labels:list[int], beta:int, formula:str) -> float:
    n = len(column)
    ordered = sorted(column)
    edges = []
    for i in range(1, beta):
        position = math.ceil(Fraction(i * n, beta)) - 1
        edge = ordered[position]
        if edge not in edges and edge < ordered[-1]:
            edges.append(edge)
    edges.sort()

    n_bins = len(edges) + 1
    positives = [0.5] * n_bins
    negatives = [0.5] * n_bins
    for value, label in zip(column, labels):
        b = sum(1 for edge in edges if edge < value)
        if label == 1:
            positives[b] += 1
        else:
            negatives[b] += 1

    total_positive = sum(positives)
    total_negative = sum(negatives)
    iv = 0.0
    for b in range(n_bins):
        p = positives[b] / total_positive
        q = negatives[b] / total_negative
        iv += (p - q) * (math.log(p / q) if formula == IV_STANDARD_LOG else p / q)
    return iv


@pytest.mark.parametrize("formula", ["standard_log", "paper_literal"])
def test_information_value_matches_brute_force(formula):
    rng = np.random.default_rng(21)
    for _ in range(100):
        n = int(rng.integers(4, 101))
        beta = int(rng.integers(2, 12))
        column = rng.integers(0, 12, size=n).astype(float) if rng.uniform() < 0.5 else rng.normal(size=n)
        labels = rng.integers(0, 2, size=n)
        labels[0], labels[1] = 0, 1
        cfg = SelectorConfig(beta=beta, iv_formula=formula)
        expected = brute_force_iv(column.tolist(), labels.tolist(), beta, formula)
        value = information_value(column, labels, cfg)
        assert value == pytest.approx(expected, abs=1e-12, rel=1e-12)
        if formula == IV_STANDARD_LOG:
            assert value >= 0.0


def test_strength_labels():
    assert iv_strength(0.2) == "medium"
    assert iv_strength(0.05) == "weak"
    assert iv_strength(0.02) == "useless"
    assert iv_strength(0.9) == "extremely strong"
    assert correlation_strength(-0.5) == "moderate"
    assert correlation_strength(0.95) == "extremely strong"


def test_filter_by_iv():
    rng = np.random.default_rng(4)
    labels = rng.integers(0, 2, size=200)
    d = Dataset(["copy", "const", "noise"], np.column_stack([labels.astype(float), np.ones(200), rng.normal(size=200)]), labels)
    kept, ivs = filter_by_iv(d, SelectorConfig())
    assert "copy" in kept
    assert "const" not in kept
    assert ivs["const"] == pytest.approx(0.0, abs=1e-15)
    assert ivs["copy"] > 1.0

    kept, _ = filter_by_iv(d, SelectorConfig(alpha=0.1), {"copy": 0.5, "const": 0.0, "noise": 0.05})
    assert kept == ["copy"]
    assert compute_ivs(d, SelectorConfig()) == ivs


def test_pearson_examples():
    x = np.array([1.0, 2.0, 3.0, 5.0])
    assert pearson(x, x) == pytest.approx(1.0)
    assert pearson(x, -3 * x + 7) == pytest.approx(-1.0)
    assert pearson(np.array([1.0, 2.0, 3.0]), np.array([1.0, 3.0, 2.0])) == pytest.approx(0.5, abs=1e-12)
    assert pearson(x, np.ones(4)) == 0.0
    with pytest.raises(ValueError):
        pearson(x, x[:3])
    with pytest.raises(ValueError):
        pearson(x[:1], x[:1])


def test_pearson_matches_two_pass_definition():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n = int(rng.integers(2, 60))
        a = rng.normal(size=n)
        b = 0.5 * a + rng.normal(size=n)
        mean_a = sum(a) / n
        mean_b = sum(b) / n
        cov = sum((x - mean_a) * (y - mean_b) for x, y in zip(a, b))
        expected = cov / math.sqrt(sum((x - mean_a) ** 2 for x in a) * sum((y - mean_b) ** 2 for y in b))
        assert pearson(a, b) == pytest.approx(expected, abs=1e-10)


def test_pearson_symmetric_and_unchanged_by_positive_affine_maps():
    rng = np.random.default_rng(41)
    for _ in range(50):
        n = int(rng.integers(3, 200))
        a = rng.normal(size=n)
        b = rng.uniform(-1, 1) * a + rng.normal(size=n)
        value = pearson(a, b)
        assert pearson(b, a) == pytest.approx(value, abs=1e-9)
        assert pearson(3 * a + 7, b) == pytest.approx(value, abs=1e-9)
        assert pearson(a, 0.5 * b - 2) == pytest.approx(value, abs=1e-9)
        assert pearson(3 * a + 7, 0.5 * b - 2) == pytest.approx(value, abs=1e-9)


def test_remove_redundant_keeps_higher_iv():
    rng = np.random.default_rng(2)
    a = rng.normal(size=300)
    d = Dataset(["a", "b"], np.column_stack([a, a + rng.normal(scale=0.1, size=300)]))
    kept, pairs = remove_redundant(d, {"a": 0.3, "b": 0.4})
    assert kept == ["b"]
    assert (pairs[0].kept, pairs[0].dropped) == ("b", "a")
    assert pairs[0].correlation > 0.95


def test_remove_redundant_trace():
    A = np.array([1.0, -1.0, 1.0, -1.0])
    B = np.array([1.0, 1.0, -1.0, -1.0])
    d = Dataset(["A", "B", "C"], np.column_stack([A, B, A + B]))
    kept, pairs = remove_redundant(d, {"C": 0.9, "A": 0.5, "B": 0.4}, SelectorConfig(theta=0.6))
    assert kept == ["C"]
    assert [(p.kept, p.dropped) for p in pairs] == [("C", "A"), ("C", "B")]

    kept, pairs = remove_redundant(d, {"C": 0.9, "A": 0.5, "B": 0.4}, SelectorConfig(theta=0.8))
    assert kept == ["C", "A", "B"]
    assert pairs == []

    with pytest.raises(ValueError, match="No IV"):
        remove_redundant(d, {"A": 1.0})


@pytest.mark.parametrize("row_cap", [100000, 80])
def test_remove_redundant_output_is_pairwise_uncorrelated(row_cap):
    rng = np.random.default_rng(13)
    base = rng.normal(size=(200, 4))
    mixed = base @ rng.normal(size=(4, 12)) + rng.normal(scale=0.3, size=(200, 12))
    names = [f"f{i}" for i in range(12)]
    d = Dataset(names, mixed)
    ivs = {name: float(rng.uniform()) for name in names}
    cfg = SelectorConfig(theta=0.5, pearson_row_cap=row_cap)
    kept, pairs = remove_redundant(d, ivs, cfg, seed=1)

    assert len(kept) + len(pairs) == len(names)
    if row_cap >= d.n_rows:
        for i, x in enumerate(kept):
            for y in kept[i + 1:]:
                assert abs(pearson(d.column(x), d.column(y))) <= cfg.theta + 1e-12
    for pair in pairs:
        assert ivs[pair.kept] >= ivs[pair.dropped]


def test_rank_and_cap(small_data):
    cfg = GbdtConfig(n_trees=10, max_depth=2)
    ordered, importances, ensemble = rank_and_cap(small_data, cfg, 2)
    assert len(ordered) == 2
    assert importances[ordered[0]] >= importances[ordered[1]]
    assert set(ordered) <= set(small_data.names)

    everything, _, _ = rank_and_cap(small_data, cfg, 10)
    assert sorted(everything) == sorted(small_data.names)
    assert everything[:2] == ordered
    assert all(v >= 0 for v in importances.values())
    assert ensemble.feature_names == small_data.names


def test_run_cascade_reports_every_stage(small_data):
    product = small_data.column("x1") * small_data.column("x2")
    d = small_data.with_columns(["mul(x1,x2)"], product)
    report, ensemble = run_cascade(d, SelectorConfig(), GbdtConfig(n_trees=10, max_depth=2), max_features=2)

    assert report.candidates == d.names
    assert "mul(x1,x2)" in report.iv_kept
    assert report.kept[0] == "mul(x1,x2)"
    assert set(report.kept) <= set(report.redundancy_kept) <= set(report.iv_kept)
    assert ensemble is not None
    rows = {row["feature"]: row for row in report.rows()}
    assert rows["mul(x1,x2)"]["kept"]
    assert report.to_csv().startswith("feature,iv,iv_strength,importance,kept,dropped_by\n")


def test_run_cascade_with_nothing_informative():
    labels = np.array([0, 1] * 20)
    d = Dataset(["const"], np.ones((40, 1)), labels)
    report, ensemble = run_cascade(d, SelectorConfig(), GbdtConfig(n_trees=2), max_features=2)
    assert report.kept == []
    assert ensemble is None
