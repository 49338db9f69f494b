import math

import pytest

from data import GbdtConfig
from engine import ordered_subset_count, count_search_space, count_reduced_search_space, PathSet, TreePath, extract_paths, train
from operator_registry import default_registry
from tests.helpers import make_dataset


def test_full_search_space_examples():
    assert count_search_space(4, {2: 4}) == 48
    assert count_search_space(1, {1: 3}) == 3
    assert count_search_space(0, {1: 3, 2: 6}) == 0
    assert ordered_subset_count(2, 3) == 0
    with pytest.raises(ValueError):
        ordered_subset_count(-1, 2)


def test_reduced_search_space_examples():
    path = TreePath(["a", "b", "c"], {"a": {0.0}, "b": {0.0}, "c": {0.0}})
    assert count_reduced_search_space(PathSet([path]), {2: 4}) == 24
    assert count_reduced_search_space(PathSet(), {2: 4}) == 0


def test_reduced_space_is_much_smaller_on_trained_ensemble():
    d = make_dataset(600, 50, seed=5)
    e = train(d, cfg=GbdtConfig(n_trees=4, max_depth=3))
    counts = default_registry().arity_counts()

    full = count_search_space(d.n_features, counts)
    reduced = count_reduced_search_space(extract_paths(e), counts)
    assert full == math.factorial(50) // math.factorial(48) * 6
    assert 0 < reduced < full

    expected = sum(math.factorial(len(p.features)) // math.factorial(max(len(p.features) - 2, 0)) * 6 for p in extract_paths(e) if len(p.features) >= 2)
    assert reduced == expected


@pytest.mark.parametrize("seed, label_fn", [
    (1, lambda v, rng: v[:, 0] + v[:, 1] > 0),
    (2, lambda v, rng: v[:, 0] - 2.0 * v[:, 2] > 0),
    (3, lambda v, rng: v[:, 3] + v[:, 4] + v[:, 5] > 0),
])
def test_reduced_space_at_full_ensemble_scale(seed, label_fn):
    d = make_dataset(2000, 50, seed=seed, label_fn=label_fn)
    e = train(d, cfg=GbdtConfig(n_trees=50, max_depth=4))
    paths = extract_paths(e)
    counts = {2: 6}

    full = count_search_space(50, counts)
    reduced = count_reduced_search_space(paths, counts)
    assert full == 50 * 49 * 6
    assert reduced == sum(6 * len(p.features) * (len(p.features) - 1) for p in paths)
    assert reduced < full
