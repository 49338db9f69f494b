from itertools import combinations
from time import monotonic

import numpy as np
import pytest

from data import Dataset, SafeConfig, GbdtConfig, SelectorConfig, serialize, MODES, MODE_RAND, MODE_IMP, MODE_EXHAUSTIVE
from engine import run, run_baseline, create_engineer, draw_pairs, SafeFeatureEngineer, RandFeatureEngineer
from evaluation import evaluate_auc
from operators import apply_plan
from tests.helpers import make_dataset
from utils import set_thread_count

QUICK_GBDT = GbdtConfig(n_trees=10, max_depth=3)


def quick_config(**overrides) -> SafeConfig:
    return SafeConfig(gbdt=GbdtConfig(n_trees=10, max_depth=3), **overrides)


def test_recovers_the_multiplicative_interaction(xor_train, xor_test):
    plan, report, trace = run(xor_train, None, SafeConfig())

    assert not trace.fallback
    assert any(f.base_names() == {"x1", "x2"} and f.operator_name in ("mul", "div", "rdiv") for f in plan.derived_features())
    assert len(plan) <= 2 * xor_train.n_features
    assert plan.names == report.kept

    psi_auc = evaluate_auc(apply_plan(plan, xor_train), apply_plan(plan, xor_test))
    orig_auc = evaluate_auc(xor_train, xor_test)
    assert psi_auc >= 0.95
    assert psi_auc >= orig_auc


def test_product_has_the_top_iv_among_all_pair_features(xor_train):
    from engine import compute_ivs
    from operators import generate

    pairs = [c for c in draw_pairs(xor_train.names, 10 ** 6, np.random.default_rng(0))]
    generated, _ = generate(xor_train, pairs)
    ivs = compute_ivs(generated, SelectorConfig())
    best = max(ivs, key=lambda name: ivs[name])
    assert best in ("mul(x1,x2)", "div(x1,x2)", "rdiv(x1,x2)")


def test_no_operators_means_selection_only(small_data):
    plan, _, trace = run(small_data, None, quick_config(enabled_operators=[]))
    assert set(plan.names) <= set(small_data.names)
    assert plan.derived_features() == []
    assert trace.iterations[0].n_generated == 0


def test_zero_time_budget_returns_original_features(small_data):
    plan, report, trace = run(small_data, None, quick_config(time_budget_secs=0))
    assert len(trace) == 0
    assert trace.stopped_by_time_budget
    assert plan.names == small_data.names
    assert plan.provenance["iterations"] == 0
    assert report.kept == []


def test_output_cap(xor_train):
    cfg = quick_config(selector=SelectorConfig(max_features=3))
    plan, _, _ = run(xor_train, None, cfg)
    assert 1 <= len(plan) <= 3


def test_fallback_when_nothing_survives():
    rng = np.random.default_rng(9)
    d = Dataset(["a", "b", "c"], rng.normal(size=(300, 3)), rng.integers(0, 2, size=300))
    cfg = quick_config(selector=SelectorConfig(alpha=50.0))
    plan, _, trace = run(d, None, cfg)

    assert trace.fallback
    assert trace.iterations[-1].fallback
    assert plan.names == d.names
    assert plan.provenance["fallback"] is True


def test_rand_with_large_gamma_draws_every_pair(small_data):
    rand = create_engineer(quick_config(mode=MODE_RAND, gamma=100))
    exhaustive = create_engineer(quick_config(mode=MODE_EXHAUSTIVE))
    _, _, rand_trace = rand.fit(small_data)
    _, _, exhaustive_trace = exhaustive.fit(small_data)

    every_pair = set(combinations(small_data.names, 2))
    assert {c.feature_ids for c in rand.last_combinations} == every_pair
    assert {c.feature_ids for c in exhaustive.last_combinations} == every_pair
    assert rand_trace.iterations[0].n_generated == exhaustive_trace.iterations[0].n_generated == 6 * len(every_pair)
    ## Neither mode reads a mining ensemble, so none is trained
    assert rand.last_ensemble is None and exhaustive.last_ensemble is None


def test_imp_draws_from_features_the_ensemble_uses(xor_train):
    engineer = create_engineer(quick_config(mode=MODE_IMP, gamma=3))
    engineer.fit(xor_train)
    used = set(engineer.last_ensemble.used_features())
    assert len(engineer.last_combinations) <= 3
    for combo in engineer.last_combinations:
        assert set(combo.feature_ids) <= used


def test_draw_pairs():
    rng = np.random.default_rng(1)
    drawn = draw_pairs(["d", "c", "b", "a"], 3, rng)
    assert len({c.feature_ids for c in drawn}) == 3
    assert all(c.arity == 2 for c in drawn)
    assert len(draw_pairs(["a", "b", "c"], 10, rng)) == 3
    assert draw_pairs(["a"], 2, rng) == []


@pytest.mark.parametrize("mode", MODES)
def test_same_seed_gives_the_same_plan(small_data, mode):
    cfg = quick_config(mode=mode, seed=3, n_iter=2)
    first, _, _ = run(small_data, None, cfg)
    second, _, _ = run(small_data, None, cfg)
    assert serialize(first) == serialize(second)
    assert first.provenance["mode"] == mode


def test_plan_reproduces_fit_time_columns(xor_train, xor_test):
    engineer = create_engineer(quick_config(n_iter=2))
    plan, _, trace = engineer.fit(xor_train, xor_test)

    assert isinstance(engineer, SafeFeatureEngineer)
    assert len(trace) == 2
    ## Second iteration definitions are flattened over the original columns
    assert set(plan.base_names()) <= set(xor_train.names)
    replayed = apply_plan(plan, xor_train)
    assert replayed.names == engineer.last_features.names
    assert np.array_equal(replayed.values, engineer.last_features.values)
    assert all(record.valid_auc is not None for record in trace.iterations)


def test_trace_records_every_stage(small_data):
    _, _, trace = run(small_data, None, quick_config())
    record = trace.iterations[0]
    assert record.n_paths > 0
    assert record.n_combinations >= record.n_selected_combinations
    assert record.n_candidates >= record.n_after_iv >= record.n_after_redundancy >= record.n_after_rank >= 1
    assert 0.0 <= record.valid_auc <= 1.0
    assert trace.to_json_lines().count("\n") == 2


def test_validation_data_is_checked(small_data):
    with pytest.raises(KeyError, match="'x4'"):
        run(small_data, small_data.select(["x1", "x2", "x3"]), quick_config())


def test_run_baseline_rejects_safe(small_data):
    with pytest.raises(ValueError, match="run_baseline"):
        run_baseline(small_data, None, quick_config())
    plan, _, _ = run_baseline(small_data, None, quick_config(mode=MODE_RAND))
    assert plan.provenance["mode"] == MODE_RAND
    assert isinstance(create_engineer(quick_config(mode=MODE_RAND)), RandFeatureEngineer)


def fit_and_score(train_set:Dataset, test_set:Dataset, cfg:SafeConfig) -> tuple[float, float]:
    plan, _, _ = run(train_set, None, cfg)
    return evaluate_auc(apply_plan(plan, train_set), apply_plan(plan, test_set)), evaluate_auc(train_set, test_set)


def test_single_feature_label_is_not_hurt():
    label = lambda v, rng: v[:, 0] > 0
    train_set = make_dataset(2000, 4, seed=41, label_fn=label)
    test_set = make_dataset(1000, 4, seed=42, label_fn=label)
    psi_auc, orig_auc = fit_and_score(train_set, test_set, SafeConfig())
    assert psi_auc >= orig_auc - 0.005


@pytest.mark.slow
def test_recovery_at_5000_rows_within_ten_seconds():
    set_thread_count(4)
    train_set = make_dataset(5000, 6, seed=51)
    test_set = make_dataset(5000, 6, seed=52)

    started = monotonic()
    plan, _, _ = run(train_set, None, SafeConfig())
    elapsed = monotonic() - started

    assert any(f.base_names() == {"x1", "x2"} and f.operator_name in ("mul", "div", "rdiv") for f in plan.derived_features())
    assert evaluate_auc(apply_plan(plan, train_set), apply_plan(plan, test_set)) >= 0.95
    assert elapsed < 10.0


@pytest.mark.slow
def test_generated_features_do_not_hurt_across_datasets():
    results = []
    for seed, n_features in [(61, 4), (62, 10), (63, 50), (64, 4), (65, 10)]:
        train_set = make_dataset(3000, n_features, seed=seed)
        test_set = make_dataset(2000, n_features, seed=seed + 100)
        results.append(fit_and_score(train_set, test_set, SafeConfig()))

    assert all(psi >= orig - 0.005 for psi, orig in results)
    assert sum(psi > orig for psi, orig in results) >= 3


@pytest.mark.slow
def test_safe_is_five_times_faster_than_exhaustive_generation():
    d = make_dataset(60000, 100, seed=31)
    timings = {}
    for mode in ("safe", MODE_EXHAUSTIVE):
        started = monotonic()
        run(d, None, SafeConfig(mode=mode))
        timings[mode] = monotonic() - started
    assert timings["safe"] <= timings[MODE_EXHAUSTIVE] / 5
