from itertools import combinations

import numpy as np

from data import Dataset, IterationRecord
from .abstract_engineer import AbstractFeatureEngineer
from .gbdt import TreeEnsemble
from .combiner import FeatureCombination


def _pairs(names:list[str]) -> list[FeatureCombination]:
    return [FeatureCombination(list(pair), {}) for pair in combinations(sorted(names), 2)]


def draw_pairs(names:list[str], gamma:int, rng:np.random.Generator) -> list[FeatureCombination]:
    """
    gamma distinct unordered pairs drawn uniformly from all pairs of the names (every pair when gamma covers them all)
    """
    pairs = _pairs(names)
    if gamma >= len(pairs):
        return pairs
    picked = np.sort(rng.choice(len(pairs), size=gamma, replace=False))
    return [pairs[i] for i in picked]


class RandFeatureEngineer(AbstractFeatureEngineer):
    """
    Random pairs of all current features
    """
    uses_ensemble = False

    def _select_combinations(self, current:Dataset, ensemble:TreeEnsemble|None, gamma:int, record:IterationRecord, rng:np.random.Generator) -> list[FeatureCombination]:
        self.last_candidates = _pairs(current.names)
        record.n_combinations = len(self.last_candidates)
        return draw_pairs(current.names, gamma, rng)


class ImpFeatureEngineer(AbstractFeatureEngineer):
    """
    Random pairs of the features the ensemble splits on
    """

    def _select_combinations(self, current:Dataset, ensemble:TreeEnsemble|None, gamma:int, record:IterationRecord, rng:np.random.Generator) -> list[FeatureCombination]:
        used = ensemble.used_features()
        self.last_candidates = _pairs(used)
        record.n_combinations = len(self.last_candidates)
        return draw_pairs(used, gamma, rng)


class ExhaustiveFeatureEngineer(AbstractFeatureEngineer):
    """
    Every pair of current features, regardless of gamma
    """
    uses_ensemble = False

    def _select_combinations(self, current:Dataset, ensemble:TreeEnsemble|None, gamma:int, record:IterationRecord, rng:np.random.Generator) -> list[FeatureCombination]:
        self.last_candidates = _pairs(current.names)
        record.n_combinations = len(self.last_candidates)
        return list(self.last_candidates)
