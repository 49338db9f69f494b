import pandas as pd

from data import Dataset, TransformPlan, GbdtConfig
from operators import apply_plan

ORIGIN_BASE = "base"
ORIGIN_GENERATED = "generated"


def importance_report(original:Dataset, plan:TransformPlan, gbdt_cfg:GbdtConfig = None) -> pd.DataFrame:
    """
    Average gain importance of the M original columns next to (up to) the M top ranked
    generated columns of the plan, from one ensemble trained on all of them together.
    Rows are ordered by importance, then name.
    """
    original.require_both_classes("importance scoring")
    generated = [f for f in plan.derived_features() if not original.has_column(f.name)][:original.n_features]

    scored = original
    if len(generated) > 0:
        values = apply_plan(TransformPlan(generated), original).values
        scored = original.with_columns([f.name for f in generated], values)

    from engine import gbdt
    importances = gbdt.train(scored, None, gbdt_cfg).feature_importance()

    generated_names = {f.name for f in generated}
    frame = pd.DataFrame({
        "feature": scored.names,
        "origin": [ORIGIN_GENERATED if name in generated_names else ORIGIN_BASE for name in scored.names],
        "importance": [importances[name] for name in scored.names],
    })
    return frame.sort_values(["importance", "feature"], ascending=[False, True], kind="stable").reset_index(drop=True)
