from .gbdt import TreeNode, SplitRecord, TreeEnsemble, train, predict_margin, feature_importance
from .combiner import TreePath, PathSet, FeatureCombination, extract_paths, enumerate_combinations, partition_cells, information_gain_ratio, score_combinations, top_gamma, combinations_to_csv
from .selector import iv_strength, correlation_strength, equal_frequency_bins, assign_bins, information_value, compute_ivs, filter_by_iv, pearson, remove_redundant, rank_and_cap, run_cascade
from .search_space import ordered_subset_count, count_search_space, count_reduced_search_space
from .abstract_engineer import AbstractFeatureEngineer
from .safe_engineer import SafeFeatureEngineer
from .baseline_engineers import RandFeatureEngineer, ImpFeatureEngineer, ExhaustiveFeatureEngineer, draw_pairs
from .pipeline import create_engineer, run, run_baseline
