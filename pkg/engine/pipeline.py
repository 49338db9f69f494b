from data import Dataset, TransformPlan, SafeConfig, SelectionReport, IterationTrace, MODE_SAFE, MODE_RAND, MODE_IMP, MODE_EXHAUSTIVE
from operator_registry import OperatorRegistry
from .abstract_engineer import AbstractFeatureEngineer
from .safe_engineer import SafeFeatureEngineer
from .baseline_engineers import RandFeatureEngineer, ImpFeatureEngineer, ExhaustiveFeatureEngineer

ENGINEERS = {
    MODE_SAFE: SafeFeatureEngineer,
    MODE_RAND: RandFeatureEngineer,
    MODE_IMP: ImpFeatureEngineer,
    MODE_EXHAUSTIVE: ExhaustiveFeatureEngineer,
}

BASELINE_MODES = [MODE_RAND, MODE_IMP, MODE_EXHAUSTIVE]


def create_engineer(cfg:SafeConfig, registry:OperatorRegistry = None) -> AbstractFeatureEngineer:
    if cfg.mode not in ENGINEERS:
        raise ValueError(f"Unknown mode '{cfg.mode}'")
    return ENGINEERS[cfg.mode](cfg, registry)


def run(train:Dataset, valid:Dataset|None, cfg:SafeConfig, registry:OperatorRegistry = None) -> tuple[TransformPlan, SelectionReport, IterationTrace]:
    """
    Fit the feature generation function on the training data in the configured mode.
    The validation data (optional, the training data stands in when it is empty) only feeds the trace AUC.
    """
    return create_engineer(cfg, registry).fit(train, valid)


def run_baseline(train:Dataset, valid:Dataset|None, cfg:SafeConfig, registry:OperatorRegistry = None) -> tuple[TransformPlan, SelectionReport, IterationTrace]:
    if cfg.mode not in BASELINE_MODES:
        raise ValueError(f"run_baseline needs one of the modes {BASELINE_MODES}, got '{cfg.mode}'")
    return run(train, valid, cfg, registry)
