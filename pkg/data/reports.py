import io
import csv
import json


class PrunePair:
    kept:str
    """The (higher IV) feature that was already kept"""
    dropped:str
    correlation:float

    def __init__(self, kept:str, dropped:str, correlation:float) -> None:
        self.kept = kept
        self.dropped = dropped
        self.correlation = correlation

    def to_dict(self) -> dict:
        return {"kept": self.kept, "dropped": self.dropped, "correlation": self.correlation}


class SelectionReport:
    candidates:list[str]
    """Every feature that entered the cascade, in candidate order"""
    ivs:dict[str, float]
    iv_kept:list[str]
    prune_pairs:list[PrunePair]
    redundancy_kept:list[str]
    importances:dict[str, float]
    kept:list[str]
    """Final kept names, ordered by importance"""

    def __init__(self) -> None:
        self.candidates = []
        self.ivs = {}
        self.iv_kept = []
        self.prune_pairs = []
        self.redundancy_kept = []
        self.importances = {}
        self.kept = []

    def dropped_by(self) -> dict[str, str]:
        return {pair.dropped: pair.kept for pair in self.prune_pairs}

    def rows(self) -> list[dict]:
        from engine.selector import iv_strength

        dropped_by = self.dropped_by()
        kept = set(self.kept)
        rows = []
        for name in self.candidates:
            iv = self.ivs.get(name)
            rows.append({
                "feature": name,
                "iv": iv,
                "iv_strength": iv_strength(iv) if iv is not None else "",
                "importance": self.importances.get(name),
                "kept": name in kept,
                "dropped_by": dropped_by.get(name, ""),
            })
        return rows

    def to_csv(self) -> str:
        """
        One row per candidate: feature, iv, iv_strength, importance, kept, dropped_by
        """
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["feature", "iv", "iv_strength", "importance", "kept", "dropped_by"])
        for row in self.rows():
            writer.writerow([
                row["feature"],
                "" if row["iv"] is None else repr(row["iv"]),
                row["iv_strength"],
                "" if row["importance"] is None else repr(row["importance"]),
                "1" if row["kept"] else "0",
                row["dropped_by"],
            ])
        return out.getvalue()

    def prune_pairs_to_csv(self) -> str:
        from engine.selector import correlation_strength

        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["kept", "dropped", "correlation", "strength"])
        for pair in self.prune_pairs:
            writer.writerow([pair.kept, pair.dropped, repr(pair.correlation), correlation_strength(pair.correlation)])
        return out.getvalue()


class IterationRecord:
    iteration:int
    n_paths:int = 0
    n_combinations:int = 0
    """Combinations enumerated (safe) or available to draw from (baselines)"""
    n_selected_combinations:int = 0
    n_generated:int = 0
    n_candidates:int = 0
    n_after_iv:int = 0
    n_after_redundancy:int = 0
    n_after_rank:int = 0
    valid_auc:float|None = None
    elapsed_secs:float = 0.0
    fallback:bool = False
    """Set when no feature survived the cascade and the original features were returned"""

    def __init__(self, iteration:int) -> None:
        self.iteration = iteration

    def stage_counts(self) -> list[int]:
        return [self.n_candidates, self.n_after_iv, self.n_after_redundancy, self.n_after_rank]

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "paths": self.n_paths,
            "combinations": self.n_combinations,
            "selected_combinations": self.n_selected_combinations,
            "generated": self.n_generated,
            "candidates": self.n_candidates,
            "after_iv": self.n_after_iv,
            "after_redundancy": self.n_after_redundancy,
            "after_rank": self.n_after_rank,
            "valid_auc": self.valid_auc,
            "elapsed_secs": self.elapsed_secs,
            "fallback": self.fallback,
        }


class IterationTrace:
    iterations:list[IterationRecord]
    mode:str = None
    stopped_by_time_budget:bool = False
    fallback:bool = False

    def __init__(self, mode:str = None) -> None:
        self.iterations = []
        self.mode = mode

    def __len__(self) -> int:
        return len(self.iterations)

    def to_json_lines(self, include_timing:bool = False) -> str:
        """
        One JSON object per iteration, then a summary line. Timings are left out unless asked for
        so that the output of a seeded run is reproducible byte for byte.
        """
        lines = []
        for record in self.iterations:
            item = record.to_dict()
            if not include_timing:
                item.pop("elapsed_secs")
            lines.append(json.dumps(item, sort_keys=False))
        lines.append(json.dumps({"summary": {"mode": self.mode, "iterations": len(self.iterations), "stopped_by_time_budget": self.stopped_by_time_budget, "fallback": self.fallback}}))
        return "\n".join(lines) + "\n"
