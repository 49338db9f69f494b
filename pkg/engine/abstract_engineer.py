import logging
from time import monotonic
from abc import abstractmethod

import numpy as np

from data import Dataset, FeatureDef, TransformPlan, SafeConfig, SelectionReport, IterationRecord, IterationTrace
from operators import plan_generation, compute_planned, apply_plan
from operator_registry import OperatorRegistry, GLOBAL_OPERATOR_REGISTRY
from . import gbdt
from .gbdt import TreeEnsemble
from .combiner import FeatureCombination, PathSet
from .selector import compute_ivs, run_cascade

## Generated columns are computed and IV filtered this many at a time, only the survivors are held on to
GENERATION_BATCH_SIZE = 512


class AbstractFeatureEngineer:
    """
    The iterative loop shared by every mode: train an ensemble on the current features, pick
    feature combinations (the part each mode does differently), generate new features from them and
    run the IV / redundancy / importance cascade over the generated plus current features.
    The kept features become the next iteration's current features.
    """
    _config:SafeConfig
    _registry:OperatorRegistry
    uses_ensemble:bool = True
    """Whether combinations are picked from a mining ensemble trained on the current features"""

    last_ensemble:TreeEnsemble = None
    """The combination mining ensemble of the last completed iteration"""
    last_paths:PathSet = None
    last_candidates:list[FeatureCombination] = None
    """Every combination the last completed iteration chose from (scored when the mode scores them)"""
    last_combinations:list[FeatureCombination] = None
    """Combinations handed to generation in the last completed iteration"""
    last_features:Dataset = None
    """The training rows in the representation the fitted plan produces"""

    def __init__(self, config:SafeConfig, registry:OperatorRegistry = None) -> None:
        global GLOBAL_OPERATOR_REGISTRY
        self._config = config
        self._registry = registry if registry is not None else GLOBAL_OPERATOR_REGISTRY
        self._enabled = [op.name for op in self._registry.resolve_enabled(config.enabled_operators)]
        self._enabled_arities = {op.arity for op in self._registry.resolve_enabled(self._enabled)}
        self.last_candidates = []
        self.last_combinations = []

    @property
    def mode(self) -> str:
        return self._config.mode

    @abstractmethod
    def _select_combinations(self, current:Dataset, ensemble:TreeEnsemble|None, gamma:int, record:IterationRecord, rng:np.random.Generator) -> list[FeatureCombination]:
        """
        Pick the feature combinations to generate from this iteration, filling in the path and combination counts of the record
        """
        raise NotImplementedError("This method must be implemented by the subclass")

    def fit(self, train:Dataset, valid:Dataset|None = None) -> tuple[TransformPlan, SelectionReport, IterationTrace]:
        cfg = self._config
        cfg.validate()
        train.require_both_classes("feature engineering")
        valid = self._check_valid(train, valid)

        n_original = train.n_features
        gamma = cfg.resolved_gamma(n_original)
        max_features = cfg.selector.resolved_max_features(n_original)
        rng = np.random.default_rng(cfg.seed)

        defs = {name: FeatureDef.base(name) for name in train.names}
        current = train
        report = SelectionReport()
        trace = IterationTrace(cfg.mode)

        started = monotonic()
        while len(trace) < cfg.n_iter:
            if cfg.time_budget_secs is not None and monotonic() - started >= cfg.time_budget_secs:
                trace.stopped_by_time_budget = True
                logging.warning(f"Time budget of {cfg.time_budget_secs}s used up after {len(trace)} iteration(s)")
                break

            record = IterationRecord(len(trace) + 1)
            iteration_started = monotonic()
            report, survivors = self._iterate(current, valid, defs, gamma, max_features, record, rng)
            record.elapsed_secs = monotonic() - iteration_started
            trace.iterations.append(record)

            if survivors is None:
                record.fallback = True
                trace.fallback = True
                logging.warning(f"No feature survived selection in iteration {record.iteration}, falling back to the original features")
                break

            current = survivors
            logging.info(f"[{cfg.mode}] iteration {record.iteration}: paths={record.n_paths} combinations={record.n_combinations} "
                         f"generated={record.n_generated} cascade={record.stage_counts()} valid_auc={record.valid_auc}")

        if trace.fallback or len(trace) == 0:
            current = train
        features = [defs[name] for name in current.names]
        self.last_features = current

        provenance = {
            "mode": cfg.mode,
            "seed": cfg.seed,
            "config_digest": cfg.config_digest(),
            "iterations": len(trace),
            "original_features": n_original,
            "fallback": trace.fallback,
        }
        return TransformPlan(features, provenance), report, trace

    def _check_valid(self, train:Dataset, valid:Dataset|None) -> Dataset|None:
        if valid is None or valid.n_rows == 0:
            return None
        missing = [name for name in train.names if not valid.has_column(name)]
        if len(missing) > 0:
            raise KeyError(f"Validation data is missing feature column(s): {', '.join(repr(m) for m in missing)}")
        valid.require_both_classes("validation")
        return valid.select(train.names)

    def _iterate(self, current:Dataset, valid:Dataset|None, defs:dict[str, FeatureDef], gamma:int, max_features:int, record:IterationRecord, rng:np.random.Generator) -> tuple[SelectionReport, Dataset|None]:
        cfg = self._config

        ensemble = gbdt.train(current, None, cfg.gbdt) if self.uses_ensemble else None
        self.last_ensemble = ensemble

        combos = [c for c in self._select_combinations(current, ensemble, gamma, record, rng) if c.arity in self._enabled_arities]
        record.n_selected_combinations = len(combos)
        self.last_combinations = combos

        planned = plan_generation(current, combos, self._registry, self._enabled, defs)
        record.n_generated = len(planned)

        candidates, ivs = self._generate_and_screen(current, planned)
        for feature, _, _ in planned:
            if candidates.has_column(feature.name):
                defs[feature.name] = feature

        candidate_names = list(current.names) + [feature.name for feature, _, _ in planned]
        report, rank_ensemble = run_cascade(candidates, cfg.selector, cfg.gbdt, max_features, cfg.seed, ivs, candidate_names)
        record.n_candidates = len(candidate_names)
        record.n_after_iv = len(report.iv_kept)
        record.n_after_redundancy = len(report.redundancy_kept)
        record.n_after_rank = len(report.kept)

        if rank_ensemble is None or len(report.kept) == 0:
            return report, None

        record.valid_auc = self._ranking_auc(rank_ensemble, candidates, valid, defs)
        return report, candidates.select(report.kept)

    def _generate_and_screen(self, current:Dataset, planned:list) -> tuple[Dataset, dict[str, float]]:
        """
        The candidate set (current features plus generated features), with generated columns whose IV
        is not above alpha already left out. Returns the candidates and the IV of every feature considered.
        """
        selector = self._config.selector
        ivs = compute_ivs(current, selector)
        names = []
        columns = []
        for start in range(0, len(planned), GENERATION_BATCH_SIZE):
            generated = compute_planned(current, planned[start:start + GENERATION_BATCH_SIZE])
            batch_ivs = compute_ivs(generated, selector)
            ivs.update(batch_ivs)
            for name in generated.names:
                if batch_ivs[name] > selector.alpha:
                    names.append(name)
                    columns.append(generated.column(name))
            logging.debug(f"Generated {min(start + GENERATION_BATCH_SIZE, len(planned))}/{len(planned)} feature(s), {len(names)} above the IV threshold so far")

        if len(names) == 0:
            return current, ivs
        return current.with_columns(names, np.column_stack(columns)), ivs

    def _ranking_auc(self, rank_ensemble:TreeEnsemble, candidates:Dataset, valid:Dataset|None, defs:dict[str, FeatureDef]) -> float:
        from evaluation import auc

        if valid is None:
            scored = candidates
        else:
            scored = apply_plan(TransformPlan([defs[name] for name in rank_ensemble.feature_names]), valid)
        return auc(rank_ensemble.predict_margin(scored), scored.labels)
