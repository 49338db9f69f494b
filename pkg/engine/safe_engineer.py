import logging

import numpy as np

from data import Dataset, IterationRecord
from .abstract_engineer import AbstractFeatureEngineer
from .gbdt import TreeEnsemble
from .combiner import FeatureCombination, extract_paths, enumerate_combinations, score_combinations, top_gamma


class SafeFeatureEngineer(AbstractFeatureEngineer):
    """
    Mines feature combinations from the split paths of the ensemble and keeps the gamma
    combinations whose split values partition the rows with the highest information gain ratio
    """

    def _select_combinations(self, current:Dataset, ensemble:TreeEnsemble, gamma:int, record:IterationRecord, rng:np.random.Generator) -> list[FeatureCombination]:
        paths = extract_paths(ensemble)
        self.last_paths = paths
        record.n_paths = paths.k

        combos = enumerate_combinations(paths, self._config.max_arity)
        record.n_combinations = len(combos)

        ## Only combinations some enabled operator can be applied to compete for the gamma slots
        usable = [c for c in combos if c.arity in self._enabled_arities]
        self.last_candidates = score_combinations(current, usable, self._config.score_mode)
        selected = top_gamma(self.last_candidates, gamma)
        if len(selected) > 0:
            logging.debug(f"Top combination {selected[0].feature_ids} (igr {selected[0].igr:.6f}) of {len(usable)} usable")
        return selected
