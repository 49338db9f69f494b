import os
import sys
import copy
import logging
import argparse

import pandas as pd

from data import (SafeConfig, GbdtConfig, SelectorConfig, MODES, IV_FORMULAS, SCORE_MODES, MISSING_POLICIES, MISSING_REJECT,
                  load_csv, from_frame, serialize, deserialize)
from engine import create_engineer, combinations_to_csv
from evaluation import SCORERS, SCORER_GBDT, evaluate_auc, importance_report, stability_jsd, worst_case_jsd, FeatureDistribution
from operators import apply_plan
from utils import set_thread_count, output_path, write_text

DEFAULT_OUTPUT_DIR = "output"
DEFAULT_CHUNK_ROWS = 10000

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def _operator_list(val:str) -> list[str]:
    return [v.strip() for v in val.split(",") if v.strip() != ""]


## (flag, config section, attribute, type, help); defaults come from the config classes
SAFE_FLAGS = [
    ("--mode", "safe", "mode", str, f"combination selection: {', '.join(MODES)}"),
    ("--seed", "safe", "seed", int, "random seed"),
    ("--n-iter", "safe", "n_iter", int, "number of iterations"),
    ("--time-budget-secs", "safe", "time_budget_secs", float, "stop starting new iterations after this many seconds (default: no limit)"),
    ("--gamma", "safe", "gamma", int, "combinations carried into generation (default: 2M)"),
    ("--max-arity", "safe", "max_arity", int, "largest combination size"),
    ("--score-mode", "safe", "score_mode", str, f"combination score: {', '.join(SCORE_MODES)}"),
    ("--enabled-operators", "safe", "enabled_operators", _operator_list, "comma separated operator names"),
]

SELECTOR_FLAGS = [
    ("--alpha", "selector", "alpha", float, "IV threshold"),
    ("--beta", "selector", "beta", int, "equal frequency bins for IV"),
    ("--theta", "selector", "theta", float, "Pearson redundancy threshold"),
    ("--max-features", "selector", "max_features", int, "output feature cap (default: 2M)"),
    ("--iv-formula", "selector", "iv_formula", str, f"IV formula: {', '.join(IV_FORMULAS)}"),
    ("--pearson-row-cap", "selector", "pearson_row_cap", int, "rows sampled for the Pearson stage"),
]

GBDT_FLAGS = [
    ("--n-trees", "gbdt", "n_trees", int, "boosting rounds"),
    ("--max-depth", "gbdt", "max_depth", int, "tree depth"),
    ("--learning-rate", "gbdt", "learning_rate", float, "shrinkage"),
    ("--reg-lambda", "gbdt", "reg_lambda", float, "L2 leaf regularisation"),
    ("--min-gain", "gbdt", "min_gain", float, "minimum split gain"),
    ("--min-child-rows", "gbdt", "min_child_rows", int, "minimum rows per child"),
    ("--gbdt-seed", "gbdt", "seed", int, "ensemble seed"),
]

DEFAULTS = {"safe": SafeConfig(), "selector": SelectorConfig(), "gbdt": GbdtConfig()}


class CliArgumentParser(argparse.ArgumentParser):
    """
    Reports usage errors as exceptions so that they exit like every other error
    """

    def error(self, message:str):
        raise ValueError(message)


def _dest(flag:str) -> str:
    return flag[2:].replace("-", "_")


def _add_config_flags(parser:argparse.ArgumentParser, flags:list[tuple]) -> None:
    for flag, section, attr, attr_type, help_text in flags:
        default = getattr(DEFAULTS[section], attr)
        if isinstance(default, list):
            default = ",".join(default)
        suffix = f" (default: {default})" if default is not None else ""
        parser.add_argument(flag, dest=_dest(flag), type=attr_type, default=None, help=help_text + suffix)


def _add_input_flags(parser:argparse.ArgumentParser, *names:str) -> None:
    for name in names:
        parser.add_argument(f"--{name}", required=True, help=f"{name} CSV file")
    parser.add_argument("--label", required=True, help="label column name")
    parser.add_argument("--missing-policy", choices=MISSING_POLICIES, default=MISSING_REJECT, help=f"missing value handling (default: {MISSING_REJECT})")


def build_parser() -> argparse.ArgumentParser:
    common = CliArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="named configuration to start from (flags override it)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    common.add_argument("--log-level", choices=LOG_LEVELS, default="WARNING", help="log level, logs go to stderr (default: WARNING)")

    parser = CliArgumentParser(prog="safe", description="Automatic feature engineering with tree path mining and IV based selection")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=CliArgumentParser)

    fit = commands.add_parser("fit", parents=[common], help="fit a feature generation plan")
    _add_input_flags(fit, "train")
    fit.add_argument("--valid", default=None, help="validation CSV file (default: the training data)")
    fit.add_argument("--output", default=DEFAULT_OUTPUT_DIR, help=f"artifact directory (default: {DEFAULT_OUTPUT_DIR})")
    fit.add_argument("--dump-trees", action="store_true", help="also write the last mining ensemble as text")
    fit.add_argument("--dump-combinations", action="store_true", help="also write the combinations of the last iteration as CSV")
    _add_config_flags(fit, SAFE_FLAGS + SELECTOR_FLAGS + GBDT_FLAGS)

    transform = commands.add_parser("transform", parents=[common], help="apply a plan to a CSV file")
    transform.add_argument("--psi", required=True, help="plan document written by fit")
    transform.add_argument("--input", required=True, help="CSV file to transform")
    transform.add_argument("--label", default=None, help="label column to carry over")
    transform.add_argument("--output", default=DEFAULT_OUTPUT_DIR, help=f"artifact directory (default: {DEFAULT_OUTPUT_DIR})")
    transform.add_argument("--chunk-rows", type=int, default=DEFAULT_CHUNK_ROWS, help=f"rows read per chunk (default: {DEFAULT_CHUNK_ROWS})")

    evaluate = commands.add_parser("evaluate", parents=[common], help="compare test AUC of the original and transformed features")
    _add_input_flags(evaluate, "train", "test")
    evaluate.add_argument("--psi", default=None, help="plan document to compare against the original features")
    evaluate.add_argument("--scorer", choices=SCORERS, default=SCORER_GBDT, help=f"downstream model (default: {SCORER_GBDT})")
    evaluate.add_argument("--output", default=None, help="directory for the AUC table and the importance report (nothing is written when unset)")
    _add_config_flags(evaluate, GBDT_FLAGS)

    stability = commands.add_parser("stability", parents=[common], help="JSD stability of the kept features over repeated fits")
    _add_input_flags(stability, "train")
    stability.add_argument("--valid", default=None, help="validation CSV file (default: the training data)")
    stability.add_argument("--runs", type=int, required=True, help="number of fits (at least 2), seeded seed..seed+runs-1")
    stability.add_argument("--output", default=None, help="directory for the feature distribution (nothing is written when unset)")
    _add_config_flags(stability, SAFE_FLAGS + SELECTOR_FLAGS + GBDT_FLAGS)

    return parser


def build_config(args:argparse.Namespace, flags:list[tuple]) -> SafeConfig:
    cfg = SafeConfig.load(args.config) if args.config else SafeConfig()
    for flag, section, attr, _, _ in flags:
        val = getattr(args, _dest(flag))
        if val is None:
            continue
        target = cfg if section == "safe" else getattr(cfg, section)
        setattr(target, attr, val)
    cfg.validate()
    return cfg


def run_fit(args:argparse.Namespace) -> int:
    cfg = build_config(args, SAFE_FLAGS + SELECTOR_FLAGS + GBDT_FLAGS)
    train = load_csv(args.train, args.label, args.missing_policy)
    valid = load_csv(args.valid, args.label, args.missing_policy) if args.valid else None

    engineer = create_engineer(cfg)
    plan, report, trace = engineer.fit(train, valid)

    write_text(args.output, "psi.json", serialize(plan).decode("utf-8"))
    write_text(args.output, "selection_report.csv", report.to_csv())
    write_text(args.output, "prune_pairs.csv", report.prune_pairs_to_csv())
    write_text(args.output, "trace.jsonl", trace.to_json_lines())
    if args.dump_trees and engineer.last_ensemble is not None:
        write_text(args.output, "trees.txt", engineer.last_ensemble.dump())
    if args.dump_combinations:
        combinations_to_csv(engineer.last_candidates, output_path(args.output, "combinations.csv"))

    logging.info(f"Plan with {len(plan)} feature(s) written to {args.output}")
    return 0


def run_transform(args:argparse.Namespace) -> int:
    if args.chunk_rows < 1:
        raise ValueError(f"--chunk-rows must be at least 1, got {args.chunk_rows}")
    if not os.path.isfile(args.psi):
        raise FileNotFoundError(f"Plan file '{args.psi}' does not exist")
    if not os.path.isfile(args.input):
        raise FileNotFoundError(f"CSV file '{args.input}' does not exist")

    with open(args.psi, "rb") as f:
        plan = deserialize(f.read())

    header = [str(c) for c in pd.read_csv(args.input, nrows=0, encoding="utf-8").columns]
    missing = [name for name in plan.base_names() if name not in header]
    if len(missing) > 0:
        raise KeyError(f"Missing base feature column(s): {', '.join(repr(m) for m in missing)}")
    if args.label is not None and args.label not in header:
        raise KeyError(f"Unknown label column '{args.label}'")

    needed = set(plan.base_names()) | ({args.label} if args.label else set())
    target = output_path(args.output, "transformed.csv")
    n_rows = 0
    with open(target, "w", encoding="utf-8", newline="") as f:
        ## Row by row semantics, read and written a chunk at a time
        for chunk in pd.read_csv(args.input, encoding="utf-8", float_precision="round_trip", usecols=lambda c: c in needed, chunksize=args.chunk_rows):
            transformed = apply_plan(plan, from_frame(chunk, args.label, MISSING_REJECT, n_rows))
            transformed.to_frame(args.label).to_csv(f, index=False, header=(n_rows == 0), lineterminator="\n")
            n_rows += len(chunk)
        if n_rows == 0:
            pd.DataFrame(columns=plan.names + ([args.label] if args.label else [])).to_csv(f, index=False, lineterminator="\n")

    logging.info(f"Transformed {n_rows} row(s) into {target}")
    return 0


def run_evaluate(args:argparse.Namespace) -> int:
    cfg = build_config(args, GBDT_FLAGS)
    train = load_csv(args.train, args.label, args.missing_policy)
    test = load_csv(args.test, args.label, args.missing_policy)
    test.require_both_classes("evaluation")

    results = [("orig", evaluate_auc(train, test, args.scorer, cfg.gbdt))]
    plan = None
    if args.psi is not None:
        with open(args.psi, "rb") as f:
            plan = deserialize(f.read())
        results.append(("psi", evaluate_auc(apply_plan(plan, train), apply_plan(plan, test), args.scorer, cfg.gbdt)))

    for features, value in results:
        print(f"{features}\t{value:.6f}")

    if args.output is not None:
        write_text(args.output, "evaluation.csv", "features,scorer,auc\n" + "".join(f"{features},{args.scorer},{value!r}\n" for features, value in results))
        if plan is not None:
            report = importance_report(train, plan, cfg.gbdt)
            write_text(args.output, "importance.csv", report.to_csv(index=False, lineterminator="\n"))
    return 0


def run_stability(args:argparse.Namespace) -> int:
    if args.runs < 2:
        raise ValueError(f"--runs must be at least 2, got {args.runs}")
    cfg = build_config(args, SAFE_FLAGS + SELECTOR_FLAGS + GBDT_FLAGS)
    train = load_csv(args.train, args.label, args.missing_policy)
    valid = load_csv(args.valid, args.label, args.missing_policy) if args.valid else None

    runs = []
    for t in range(args.runs):
        run_cfg = copy.deepcopy(cfg)
        run_cfg.seed = cfg.seed + t
        plan, _, _ = create_engineer(run_cfg).fit(train, valid)
        runs.append(plan.names)
        logging.info(f"Stability run {t + 1}/{args.runs} (seed {run_cfg.seed}): {len(plan)} feature(s)")

    max_features = cfg.selector.resolved_max_features(train.n_features)
    jsd = stability_jsd(runs, train.n_features, max_features)
    logging.info(f"Worst case JSD for M={train.n_features}, T={args.runs}: {worst_case_jsd(train.n_features, args.runs)}")
    print(jsd)

    if args.output is not None:
        write_text(args.output, "feature_distribution.csv", FeatureDistribution.from_runs(runs, train.n_features, max_features).to_csv())
    return 0


COMMANDS = {
    "fit": run_fit,
    "transform": run_transform,
    "evaluate": run_evaluate,
    "stability": run_stability,
}


def configure_logging(level:str) -> None:
    logging.basicConfig(level=getattr(logging, level), stream=sys.stderr, format="%(levelname)s %(message)s", force=True)
    logging.getLogger("azure").setLevel(logging.ERROR) ## Only log the ERRORs from the azure libraries


def main(argv:list[str] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        set_thread_count(args.threads)
        return COMMANDS[args.command](args)
    except Exception as e:
        ## KeyError wraps its message in quotes
        message = e.args[0] if isinstance(e, KeyError) and len(e.args) > 0 else str(e)
        print(f"error: {message}", file=sys.stderr)
        logging.debug("Command failed", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
