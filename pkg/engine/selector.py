import math
import logging

import numpy as np

from data import Dataset, GbdtConfig, SelectorConfig, SelectionReport, PrunePair, IV_STANDARD_LOG, IV_LITERAL
from utils import parallel_map
from . import gbdt
from .gbdt import TreeEnsemble

IV_SMOOTHING = 0.5

IV_STRENGTHS = [
    (0.02, "useless"),
    (0.1, "weak"),
    (0.3, "medium"),
    (0.5, "strong"),
]

CORRELATION_STRENGTHS = [
    (0.2, "very weak"),
    (0.4, "weak"),
    (0.6, "moderate"),
    (0.8, "strong"),
]


def iv_strength(iv:float) -> str:
    """
    Rule of thumb predictive power class of an information value (boundaries belong to the lower class)
    """
    for bound, label in IV_STRENGTHS:
        if iv <= bound:
            return label
    return "extremely strong"


def correlation_strength(r:float) -> str:
    for bound, label in CORRELATION_STRENGTHS:
        if abs(r) <= bound:
            return label
    return "extremely strong"


def equal_frequency_bins(column:np.ndarray, beta:int) -> np.ndarray:
    """
    Bin edges at the i/beta quantiles (i = 1..beta-1) of the sorted column, taking the lower
    order statistic (sorted[ceil(i*N/beta) - 1]). Duplicate edges collapse and edges at the
    column maximum are dropped, so tied values share a bin and there are at most beta bins.
    A value <= edge falls in the lower bin.
    """
    column = np.asarray(column, dtype=np.float64)
    if column.size == 0:
        raise ValueError("Cannot bin an empty column")
    if beta < 2:
        raise ValueError(f"beta must be at least 2, got {beta}")

    n = column.size
    ordered = np.sort(column)
    ## Integer ceiling keeps i*N/beta exact
    positions = np.array([(i * n + beta - 1) // beta - 1 for i in range(1, beta)], dtype=np.int64)
    edges = np.unique(ordered[np.clip(positions, 0, n - 1)])
    return edges[edges < ordered[-1]]


def assign_bins(column:np.ndarray, edges:np.ndarray) -> np.ndarray:
    return np.searchsorted(edges, column, side="left")


def information_value(column:np.ndarray, labels:np.ndarray, cfg:SelectorConfig|None = None) -> float:
    """
    Information value of the column over equal frequency bins. Each bin's positive and negative
    counts are smoothed by +0.5 before being normalised into the shares p_i and q_i.
    standard_log: sum (p_i - q_i) * ln(p_i / q_i); paper_literal: sum (p_i - q_i) * (p_i / q_i)
    """
    cfg = cfg if cfg is not None else SelectorConfig()
    column = np.asarray(column, dtype=np.float64)
    labels = np.asarray(labels)
    if column.size == 0:
        raise ValueError("Cannot compute the IV of an empty column")
    if column.shape != labels.shape:
        raise ValueError(f"Column and labels differ in length ({column.size} vs {labels.size})")
    n_positive = int(labels.sum())
    if n_positive == 0 or n_positive == labels.size:
        raise ValueError("Information value needs both label classes")

    bins = assign_bins(column, equal_frequency_bins(column, cfg.beta))
    n_bins = int(bins.max()) + 1
    positives = np.bincount(bins, weights=labels.astype(np.float64), minlength=n_bins) + IV_SMOOTHING
    negatives = np.bincount(bins, minlength=n_bins) - positives + 2 * IV_SMOOTHING
    p = positives / positives.sum()
    q = negatives / negatives.sum()

    if cfg.iv_formula == IV_STANDARD_LOG:
        return float(np.sum((p - q) * np.log(p / q)))
    if cfg.iv_formula == IV_LITERAL:
        return float(np.sum((p - q) * (p / q)))
    raise ValueError(f"Unknown IV formula '{cfg.iv_formula}'")


def compute_ivs(features:Dataset, cfg:SelectorConfig) -> dict[str, float]:
    labels = features.require_both_classes("information value")
    values = parallel_map(lambda name: information_value(features.column(name), labels, cfg), features.names)
    return dict(zip(features.names, values))


def filter_by_iv(features:Dataset, cfg:SelectorConfig, ivs:dict[str, float]|None = None) -> tuple[list[str], dict[str, float]]:
    """
    Keep the features whose IV is strictly above alpha (in feature order)
    """
    if ivs is None:
        ivs = compute_ivs(features, cfg)
    kept = [name for name in features.names if ivs[name] > cfg.alpha]
    return kept, ivs


def pearson(a:np.ndarray, b:np.ndarray) -> float:
    """
    Pearson correlation; 0 when either column is constant
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"Columns differ in length ({a.size} vs {b.size})")
    if a.size < 2:
        raise ValueError("Pearson correlation needs at least 2 rows")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return 0.0

    da = a - a.mean()
    db = b - b.mean()
    r = float(np.sum(da * db) / (math.sqrt(np.sum(da * da)) * math.sqrt(np.sum(db * db))))
    return min(1.0, max(-1.0, r))


def _unit_centered(column:np.ndarray) -> np.ndarray:
    if np.ptp(column) == 0:
        return np.zeros(column.size)
    centered = column - column.mean()
    return centered / math.sqrt(np.sum(centered * centered))


def remove_redundant(features:Dataset, ivs:dict[str, float], cfg:SelectorConfig|None = None, seed:int = 0) -> tuple[list[str], list[PrunePair]]:
    """
    Greedy scan in descending IV order (ties by name): a feature is kept if its |pearson| with
    every already kept feature is <= theta, otherwise the first kept feature above theta is
    recorded as the one that displaced it.
    """
    cfg = cfg if cfg is not None else SelectorConfig()
    missing = [name for name in features.names if name not in ivs]
    if len(missing) > 0:
        raise ValueError(f"No IV for feature(s): {missing}")

    rows = np.arange(features.n_rows)
    if features.n_rows > cfg.pearson_row_cap:
        rows = np.sort(np.random.default_rng(seed).choice(features.n_rows, cfg.pearson_row_cap, replace=False))
        logging.debug(f"Pearson stage subsampled to {rows.size} of {features.n_rows} rows")

    order = sorted(features.names, key=lambda name: (-ivs[name], name))
    ## Unit vectors of the kept features, grown on demand
    basis = np.zeros((min(len(order), 64), rows.size))
    kept = []
    prune_pairs = []
    for name in order:
        z = _unit_centered(features.column(name)[rows])
        if len(kept) > 0:
            correlations = np.clip(basis[:len(kept)] @ z, -1.0, 1.0)
            exceeded = np.flatnonzero(np.abs(correlations) > cfg.theta)
            if exceeded.size > 0:
                first = int(exceeded[0])
                prune_pairs.append(PrunePair(kept[first], name, float(correlations[first])))
                continue
        if len(kept) == basis.shape[0]:
            basis = np.vstack([basis, np.zeros((min(len(order), 2 * basis.shape[0]) - basis.shape[0], rows.size))])
        basis[len(kept)] = z
        kept.append(name)

    return kept, prune_pairs


def rank_and_cap(features:Dataset, gbdt_cfg:GbdtConfig, max_features:int) -> tuple[list[str], dict[str, float], TreeEnsemble]:
    """
    Train the ensemble on the surviving features, order them by average gain importance
    (descending, ties by name) and keep the first max_features. Zero importance features
    stay at the tail unless the cap cuts them.
    """
    if features.n_features < 1:
        raise ValueError("Ranking needs at least one feature")
    if max_features < 1:
        raise ValueError(f"max_features must be at least 1, got {max_features}")

    ensemble = gbdt.train(features, None, gbdt_cfg)
    importances = ensemble.feature_importance()
    ordered = sorted(features.names, key=lambda name: (-importances[name], name))
    return ordered[:max_features], importances, ensemble


def run_cascade(candidates:Dataset, selector_cfg:SelectorConfig, gbdt_cfg:GbdtConfig, max_features:int, seed:int = 0, ivs:dict[str, float]|None = None, candidate_names:list[str]|None = None) -> tuple[SelectionReport, TreeEnsemble|None]:
    """
    IV filter -> redundancy removal -> importance ranking with the output cap.
    Returns the report and the ranking ensemble (None when nothing survived to be ranked).
    `candidate_names` lists every feature considered when some were screened out before the call (their IVs must be in `ivs`).
    """
    report = SelectionReport()
    report.candidates = list(candidate_names if candidate_names is not None else candidates.names)

    iv_kept, report.ivs = filter_by_iv(candidates, selector_cfg, ivs)
    report.iv_kept = iv_kept
    logging.debug(f"IV filter kept {len(iv_kept)} of {candidates.n_features} candidate(s)")
    if len(iv_kept) == 0:
        return report, None

    report.redundancy_kept, report.prune_pairs = remove_redundant(candidates.select(iv_kept), report.ivs, selector_cfg, seed)
    logging.debug(f"Redundancy removal kept {len(report.redundancy_kept)} of {len(iv_kept)} feature(s)")

    ## Rank the survivors in candidate order so the ensemble sees a stable column order
    redundancy_kept = set(report.redundancy_kept)
    survivors = [name for name in candidates.names if name in redundancy_kept]
    report.kept, report.importances, ensemble = rank_and_cap(candidates.select(survivors), gbdt_cfg, max_features)
    return report, ensemble
