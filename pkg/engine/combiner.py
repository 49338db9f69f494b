import csv
import logging
from itertools import combinations

import numpy as np

from data import Dataset, SCORE_GAIN, SCORE_GAIN_RATIO
from utils import parallel_map
from .gbdt import TreeEnsemble, TreeNode


class TreePath:
    """
    The distinct split features on a route from a tree root down to a leaf's parent,
    with the split values each feature used on that route
    """
    features:tuple[str, ...]
    """Split features in order of first appearance on the route"""
    split_values:dict[str, frozenset[float]]

    def __init__(self, features:list[str], split_values:dict[str, set[float]]) -> None:
        self.features = tuple(features)
        self.split_values = {name: frozenset(split_values[name]) for name in self.features}

    def key(self) -> tuple:
        return tuple(sorted((name, tuple(sorted(values))) for name, values in self.split_values.items()))

    def __repr__(self) -> str:
        return "TreePath(" + ", ".join(f"{name}:{sorted(self.split_values[name])}" for name in self.features) + ")"


class PathSet:
    paths:list[TreePath]

    def __init__(self, paths:list[TreePath] = None) -> None:
        self.paths = list(paths or [])

    @property
    def k(self) -> int:
        return len(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)


class FeatureCombination:
    feature_ids:tuple[str, ...]
    """Sorted names of the features in the combination"""
    split_values:dict[str, frozenset[float]]
    igr:float|None = None

    def __init__(self, feature_ids:list[str], split_values:dict[str, set[float]], igr:float|None = None) -> None:
        self.feature_ids = tuple(sorted(feature_ids))
        self.split_values = {name: frozenset(split_values.get(name, ())) for name in self.feature_ids}
        self.igr = igr

    @property
    def arity(self) -> int:
        return len(self.feature_ids)

    @property
    def cell_count(self) -> int:
        count = 1
        for name in self.feature_ids:
            count *= len(self.split_values[name]) + 1
        return count

    def __repr__(self) -> str:
        return f"FeatureCombination({', '.join(self.feature_ids)}; igr={self.igr})"


def extract_paths(e:TreeEnsemble) -> PathSet:
    """
    One path per leaf parent per tree (a node with at least one leaf child).
    A feature split on several times along one route keeps all of its thresholds.
    Identical paths (same features and value sets) are kept once, in first-seen order.
    """
    paths = []
    seen = set()
    for tree in e.trees:
        if tree.is_leaf:
            continue
        ## (node, features in first-appearance order, values per feature)
        stack = [(tree, [], {})]
        while stack:
            node, features, values = stack.pop()
            name = e.feature_names[node.feature_id]
            features = features if name in values else features + [name]
            values = {**values, name: values.get(name, frozenset()) | {node.split_value}}

            if node.left.is_leaf or node.right.is_leaf:
                path = TreePath(features, values)
                if path.key() not in seen:
                    seen.add(path.key())
                    paths.append(path)

            for child in (node.right, node.left):
                if not child.is_leaf:
                    stack.append((child, features, values))

    return PathSet(paths)


def enumerate_combinations(p:PathSet, max_arity:int = 2) -> list[FeatureCombination]:
    """
    All subsets of size 1..max_arity of every path's features. A combination found on several
    paths is kept once, with the split values of each feature unioned across those paths.
    """
    if max_arity < 1:
        raise ValueError(f"max_arity must be at least 1, got {max_arity}")

    merged:dict[tuple[str, ...], dict[str, set[float]]] = {}
    for path in p:
        names = sorted(path.features)
        for arity in range(1, min(max_arity, len(names)) + 1):
            for combo in combinations(names, arity):
                values = merged.setdefault(combo, {name: set() for name in combo})
                for name in combo:
                    values[name] |= path.split_values[name]

    ordered = sorted(merged.keys(), key=lambda c: (len(c), c))
    return [FeatureCombination(list(combo), merged[combo]) for combo in ordered]


def partition_cells(d:Dataset, c:FeatureCombination) -> np.ndarray:
    """
    Cell index per row for the partition induced by the combination's split values.
    Per feature the interval index is the number of split values <= the row value
    (a value equal to a threshold falls in the upper interval, as in the trees);
    the cell index is the mixed radix combination of the interval indices.
    """
    cells = np.zeros(d.n_rows, dtype=np.int64)
    radix = 1
    for name in c.feature_ids:
        column = d.column(name)
        edges = np.array(sorted(c.split_values[name]), dtype=np.float64)
        cells += np.searchsorted(edges, column, side="right") * radix
        radix *= edges.size + 1
    return cells


def _entropy_bits(positives:np.ndarray, totals:np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, positives / totals, 0.0)
        q = 1.0 - p
        h = -(np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0) + np.where(q > 0, q * np.log2(np.where(q > 0, q, 1.0)), 0.0))
    return h


def information_gain_ratio(cells:np.ndarray, labels:np.ndarray, ratio:bool = True) -> float:
    """
    Label entropy reduction (bits) of the partition, divided by the partition's own entropy (split info).
    Returns 0 when every row sits in one cell. With ratio=False the plain gain is returned.
    """
    cells = np.asarray(cells)
    labels = np.asarray(labels)
    if cells.shape != labels.shape:
        raise ValueError(f"Cells and labels differ in length ({cells.size} vs {labels.size})")
    n = cells.size
    if n == 0:
        raise ValueError("Cannot score an empty partition")

    if np.issubdtype(cells.dtype, np.integer) and cells.min() >= 0 and cells.max() < 4 * n + 64:
        ## Small non-negative cell ids: count directly and drop the empty cells (same ascending cell order as unique)
        ids = cells.astype(np.intp, copy=False)
        totals = np.bincount(ids).astype(np.float64)
        positives = np.bincount(ids, weights=labels.astype(np.float64))
        occupied = totals > 0
        totals = totals[occupied]
        positives = positives[occupied]
    else:
        _, inverse = np.unique(cells, return_inverse=True)
        totals = np.bincount(inverse).astype(np.float64)
        positives = np.bincount(inverse, weights=labels.astype(np.float64))
    weights = totals / n

    h_y = float(_entropy_bits(np.array([labels.sum()], dtype=np.float64), np.array([n], dtype=np.float64))[0])
    h_cond = float(np.sum(weights * _entropy_bits(positives, totals)))
    gain = max(0.0, h_y - h_cond)
    if not ratio:
        return gain

    split_info = float(-np.sum(weights * np.log2(weights)))
    if split_info <= 0.0:
        return 0.0
    return gain / split_info


def score_combinations(d:Dataset, combos:list[FeatureCombination], score_mode:str = SCORE_GAIN_RATIO) -> list[FeatureCombination]:
    labels = d.require_labels()
    use_ratio = score_mode == SCORE_GAIN_RATIO
    if score_mode not in (SCORE_GAIN_RATIO, SCORE_GAIN):
        raise ValueError(f"Unknown score mode '{score_mode}'")

    scores = parallel_map(lambda c: information_gain_ratio(partition_cells(d, c), labels, use_ratio), combos)
    for combo, score in zip(combos, scores):
        combo.igr = score
    return combos


def top_gamma(combos:list[FeatureCombination], gamma:int) -> list[FeatureCombination]:
    """
    The gamma best scored combinations; ties go to the lower arity, then the lexicographically smaller names
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    ranked = sorted(combos, key=lambda c: (-(c.igr if c.igr is not None else 0.0), c.arity, c.feature_ids))
    return ranked[:gamma]


def combinations_to_csv(combos:list[FeatureCombination], path:str) -> None:
    """
    Debug dump of scored combinations (combo, arity, igr)
    """
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["combo", "arity", "igr"])
        for combo in combos:
            writer.writerow(["|".join(combo.feature_ids), combo.arity, "" if combo.igr is None else repr(combo.igr)])
    logging.debug(f"Wrote {len(combos)} scored combination(s) to {path}")
