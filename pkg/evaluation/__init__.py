from .metrics import SCORER_GBDT, SCORER_LINEAR, SCORERS, auc, evaluate_auc
from .stability import FeatureDistribution, jensen_shannon, stability_jsd, worst_case_jsd
from .importance import ORIGIN_BASE, ORIGIN_GENERATED, importance_report
