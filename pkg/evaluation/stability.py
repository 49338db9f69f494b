import numpy as np
from scipy.special import rel_entr


class FeatureDistribution:
    """
    How often each generated feature name turned up over T repeated runs
    """
    pairs:list[tuple[str, int]]
    """(name, number of runs it appeared in), most frequent first, ties by name"""
    n_runs:int
    n_original:int
    per_run:int
    """Most features a single run may keep: 2M, or the output cap when that is larger"""

    def __init__(self, pairs:list[tuple[str, int]], n_runs:int, n_original:int, per_run:int|None = None) -> None:
        self.pairs = list(pairs)
        self.n_runs = n_runs
        self.n_original = n_original
        self.per_run = per_run if per_run is not None else 2 * n_original

    def from_runs(runs:list[list[str]], n_original:int, max_features:int|None = None) -> 'FeatureDistribution':
        if len(runs) < 2:
            raise ValueError(f"Stability needs at least 2 runs, got {len(runs)}")
        if n_original < 1:
            raise ValueError(f"The original feature count must be at least 1, got {n_original}")
        per_run = max(2 * n_original, max_features or 0)

        counts:dict[str, int] = {}
        for i, run in enumerate(runs):
            names = set(run)
            if len(names) > per_run:
                raise ValueError(f"Run {i + 1} has {len(names)} feature(s), more than the per-run limit {per_run}")
            for name in names:
                counts[name] = counts.get(name, 0) + 1
        if len(counts) == 0:
            raise ValueError("Every run is empty")

        pairs = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        return FeatureDistribution(pairs, len(runs), n_original, per_run)

    def ideal_counts(self) -> list[int]:
        """
        Counts of the perfectly stable distribution over the same support: the per_run most frequent
        names (all of them when there are fewer) each seen in every run, the rest never
        """
        n_ideal = min(self.per_run, len(self.pairs))
        return [self.n_runs if i < n_ideal else 0 for i in range(len(self.pairs))]

    def observed_counts(self) -> list[int]:
        return [count for _, count in self.pairs]

    def to_csv(self) -> str:
        lines = ["feature,runs"]
        lines.extend(f"{name},{count}" for name, count in self.pairs)
        return "\n".join(lines) + "\n"


def jensen_shannon(p:np.ndarray, q:np.ndarray) -> float:
    """
    JSD between two count vectors over the same support (normalised first), natural log
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    p = p / p.sum()
    q = q / q.sum()
    r = 0.5 * (p + q)
    ## rel_entr takes 0 * ln(0 / r) as 0
    return float(0.5 * (rel_entr(p, r).sum() + rel_entr(q, r).sum()))


def stability_jsd(runs:list[list[str]], n_original:int, max_features:int|None = None) -> float:
    """
    Divergence of the observed feature distribution over repeated runs from the perfectly
    stable one; 0 when every run keeps the same features, at most ln 2. Runs may keep up to
    max(2M, max_features) features each
    """
    distribution = FeatureDistribution.from_runs(runs, n_original, max_features)
    return jensen_shannon(distribution.observed_counts(), distribution.ideal_counts())


def worst_case_jsd(n_original:int, n_runs:int) -> float:
    """
    The divergence when every run keeps 2M features no other run has
    """
    if n_original < 1 or n_runs < 2:
        raise ValueError(f"Need M >= 1 and T >= 2, got M={n_original} T={n_runs}")
    per_run = 2 * n_original
    observed = np.ones(per_run * n_runs)
    ideal = np.zeros(per_run * n_runs)
    ideal[:per_run] = n_runs
    return jensen_shannon(observed, ideal)
