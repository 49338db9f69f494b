import logging

import numpy as np

from data import Dataset, FeatureDef, TransformPlan
from utils import parallel_map


def _registry(registry):
    if registry is None:
        from operator_registry import GLOBAL_OPERATOR_REGISTRY
        return GLOBAL_OPERATOR_REGISTRY
    return registry


def plan_generation(d:Dataset, combos:list, registry = None, enabled:list[str]|set[str]|None = None, defs:dict[str, FeatureDef]|None = None) -> list[tuple[FeatureDef, any, tuple[str, ...]]]:
    """
    Work out (without computing anything) which features the combinations generate:
    one per combination of arity i and enabled operator of arity i. Parents are taken in
    name order. Features whose column name already exists (in d or earlier in the list) are dropped.
    """
    registry = _registry(registry)
    defs = defs or {}
    by_arity:dict[int, list] = {}
    for op in registry.resolve_enabled(enabled):
        by_arity.setdefault(op.arity, []).append(op)

    taken = set(d.names)
    planned = []
    for combo in combos:
        names = tuple(sorted(combo.feature_ids))
        parents = [defs.get(name) or FeatureDef.base(name) for name in names]
        for op in by_arity.get(len(names), []):
            feature = FeatureDef.derived(op.name, parents)
            if feature.name in taken:
                logging.debug(f"Dropping generated feature '{feature.name}' (name already present)")
                continue
            taken.add(feature.name)
            planned.append((feature, op, names))
    return planned


def compute_planned(d:Dataset, planned:list[tuple[FeatureDef, any, tuple[str, ...]]]) -> Dataset:
    columns = parallel_map(lambda task: task[1](*[d.column(name) for name in task[2]]), planned)
    values = np.column_stack(columns) if len(columns) > 0 else np.empty((d.n_rows, 0))
    return Dataset([feature.name for feature, _, _ in planned], values, d.labels)


def generate(d:Dataset, combos:list, registry = None, enabled:list[str]|set[str]|None = None, defs:dict[str, FeatureDef]|None = None) -> tuple[Dataset, list[FeatureDef]]:
    """
    Apply every enabled operator to every combination of matching arity.
    `defs` maps columns of d that are themselves generated to their definitions (unlisted columns are base columns).
    Returns the new columns (with d's labels) and their definitions.
    """
    planned = plan_generation(d, combos, registry, enabled, defs)
    return compute_planned(d, planned), [feature for feature, _, _ in planned]


def apply_plan(plan:TransformPlan, d:Dataset, registry = None) -> Dataset:
    """
    Compute the plan's columns, in plan order, from the base columns of d (labels are carried over)
    """
    registry = _registry(registry)
    missing = [name for name in plan.base_names() if not d.has_column(name)]
    if len(missing) > 0:
        raise KeyError(f"Missing base feature column(s): {', '.join(repr(m) for m in missing)}")

    cache:dict[str, np.ndarray] = {}

    def evaluate(feature:FeatureDef) -> np.ndarray:
        if feature.canonical_name in cache:
            return cache[feature.canonical_name]
        if feature.is_base:
            values = d.column(feature.base_name)
        else:
            values = registry[feature.operator_name](*[evaluate(p) for p in feature.parents])
        cache[feature.canonical_name] = values
        return values

    columns = [evaluate(feature) for feature in plan.features]
    values = np.column_stack(columns) if len(columns) > 0 else np.empty((d.n_rows, 0))
    return Dataset(plan.names, values, d.labels)
