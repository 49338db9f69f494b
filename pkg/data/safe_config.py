import json
import hashlib

from utils import load_named_config, resolve_config_value

IV_STANDARD_LOG = "standard_log"
IV_LITERAL = "paper_literal"
IV_FORMULAS = [IV_STANDARD_LOG, IV_LITERAL]
## Accepted spellings of the IV formulas, resolved when the selector config is validated
IV_FORMULA_ALIASES = {"ratio": IV_LITERAL, "literal": IV_LITERAL, "log": IV_STANDARD_LOG}

SCORE_GAIN_RATIO = "gain_ratio"
SCORE_GAIN = "gain"
SCORE_MODES = [SCORE_GAIN_RATIO, SCORE_GAIN]

MODE_SAFE = "safe"
MODE_RAND = "rand"
MODE_IMP = "imp"
MODE_EXHAUSTIVE = "exhaustive"
MODES = [MODE_SAFE, MODE_RAND, MODE_IMP, MODE_EXHAUSTIVE]

DEFAULT_BINARY_OPERATORS = ["add", "sub", "rsub", "mul", "div", "rdiv"]


def _apply_config_keys(config:object, config_item:dict, config_keys:dict) -> None:
    ## Load the config from the configured keys (the first alias that is present wins)
    for config_attr, (attr_type, keys) in config_keys.items():
        for key in keys:
            val = config_item.get(key)
            if val is not None:
                val = resolve_config_value(val)
                if val is None:
                    break

                ## Convert the value to the correct type
                if attr_type == int:
                    val = int(val)
                elif attr_type == float:
                    val = float(val)
                elif attr_type == bool:
                    val = val if type(val) is bool else str(val).lower() in ["1", "true", "yes", "on"]
                elif attr_type == list:
                    val = [v.strip() for v in val.split(",") if v.strip() != ""] if type(val) is str else [str(v) for v in val]
                else:
                    val = str(val)

                ## Set the value
                setattr(config, config_attr, val)
                break


def _section_item(config_item:dict, section:str, config_keys:dict) -> dict:
    """
    The settings for a nested section ("gbdt" or "selector"). Settings given at the top level
    override the nested ones, so a flat override still applies on top of a nested named config.
    """
    nested = config_item.get(section)
    if not isinstance(nested, dict):
        return config_item

    merged = dict(nested)
    for _, keys in config_keys.values():
        present = [key for key in keys if config_item.get(key) is not None]
        if len(present) > 0:
            for key in keys:
                merged.pop(key, None)
            merged[present[0]] = config_item[present[0]]
    return merged


class GbdtConfig:
    n_trees:int = 50
    max_depth:int = 4
    learning_rate:float = 0.3
    reg_lambda:float = 1.0
    min_gain:float = 0.0
    min_child_rows:int = 1
    seed:int = 0

    CONFIG_KEYS = {
        "n_trees": (int, ["n-trees", "n_trees", "trees"]),
        "max_depth": (int, ["max-depth", "max_depth", "depth"]),
        "learning_rate": (float, ["learning-rate", "learning_rate", "eta"]),
        "reg_lambda": (float, ["reg-lambda", "reg_lambda", "lambda"]),
        "min_gain": (float, ["min-gain", "min_gain", "gamma-penalty"]),
        "min_child_rows": (int, ["min-child-rows", "min_child_rows"]),
        "seed": (int, ["gbdt-seed", "gbdt_seed"]),
    }

    def __init__(self, **overrides) -> None:
        for key, val in overrides.items():
            if key not in self.CONFIG_KEYS:
                raise ValueError(f"Unknown GBDT setting '{key}'")
            setattr(self, key, val)
        self.validate()

    def validate(self) -> None:
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be at least 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be at least 1, got {self.max_depth}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must be in (0,1], got {self.learning_rate}")
        if self.reg_lambda < 0:
            raise ValueError(f"reg_lambda must be >= 0, got {self.reg_lambda}")
        if self.min_gain < 0:
            raise ValueError(f"min_gain must be >= 0, got {self.min_gain}")
        if self.min_child_rows < 1:
            raise ValueError(f"min_child_rows must be at least 1, got {self.min_child_rows}")
        if self.seed < 0:
            raise ValueError(f"seed must be unsigned, got {self.seed}")

    def from_dict(config_item:dict) -> 'GbdtConfig':
        config = GbdtConfig()
        _apply_config_keys(config, config_item, GbdtConfig.CONFIG_KEYS)
        config.validate()
        return config

    def to_dict(self) -> dict:
        return {attr: getattr(self, attr) for attr in self.CONFIG_KEYS}


class SelectorConfig:
    alpha:float = 0.1
    beta:int = 10
    theta:float = 0.8
    max_features:int|None = None
    """Output cap; None resolves to 2M for M original features"""
    iv_formula:str = IV_STANDARD_LOG
    pearson_row_cap:int = 100000

    CONFIG_KEYS = {
        "alpha": (float, ["alpha", "iv-threshold"]),
        "beta": (int, ["beta", "bins"]),
        "theta": (float, ["theta", "pearson-threshold"]),
        "max_features": (int, ["max-features", "max_features", "cap"]),
        "iv_formula": (str, ["iv-formula", "iv_formula"]),
        "pearson_row_cap": (int, ["pearson-row-cap", "pearson_row_cap"]),
    }

    def __init__(self, **overrides) -> None:
        for key, val in overrides.items():
            if key not in self.CONFIG_KEYS:
                raise ValueError(f"Unknown selector setting '{key}'")
            setattr(self, key, val)
        self.validate()

    def validate(self) -> None:
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 2:
            raise ValueError(f"beta must be at least 2, got {self.beta}")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must be in (0,1], got {self.theta}")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError(f"max_features must be at least 1, got {self.max_features}")
        self.iv_formula = IV_FORMULA_ALIASES.get(self.iv_formula, self.iv_formula)
        if self.iv_formula not in IV_FORMULAS:
            raise ValueError(f"Unknown IV formula '{self.iv_formula}' (expected one of {IV_FORMULAS})")
        if self.pearson_row_cap < 2:
            raise ValueError(f"pearson_row_cap must be at least 2, got {self.pearson_row_cap}")

    def resolved_max_features(self, n_original:int) -> int:
        return self.max_features if self.max_features is not None else max(1, 2 * n_original)

    def from_dict(config_item:dict) -> 'SelectorConfig':
        config = SelectorConfig()
        _apply_config_keys(config, config_item, SelectorConfig.CONFIG_KEYS)
        config.validate()
        return config

    def to_dict(self) -> dict:
        return {attr: getattr(self, attr) for attr in self.CONFIG_KEYS}


class SafeConfig:
    name:str = "default"

    n_iter:int = 1
    time_budget_secs:float|None = None
    gamma:int|None = None
    """Number of combinations carried into generation; None resolves to 2M"""
    mode:str = MODE_SAFE
    seed:int = 0
    max_arity:int = 2
    score_mode:str = SCORE_GAIN_RATIO
    enabled_operators:list[str] = None

    gbdt:GbdtConfig = None
    selector:SelectorConfig = None

    CONFIG_KEYS = {
        "n_iter": (int, ["n-iter", "n_iter", "iterations"]),
        "time_budget_secs": (float, ["time-budget-secs", "time_budget_secs", "time-budget"]),
        "gamma": (int, ["gamma"]),
        "mode": (str, ["mode"]),
        "seed": (int, ["seed"]),
        "max_arity": (int, ["max-arity", "max_arity"]),
        "score_mode": (str, ["score-mode", "score_mode"]),
        "enabled_operators": (list, ["operators", "enabled-operators", "enabled_operators"]),
    }

    def __init__(self, gbdt:GbdtConfig = None, selector:SelectorConfig = None, **overrides) -> None:
        self.gbdt = gbdt if gbdt is not None else GbdtConfig()
        self.selector = selector if selector is not None else SelectorConfig()
        self.enabled_operators = list(DEFAULT_BINARY_OPERATORS)
        for key, val in overrides.items():
            if key not in self.CONFIG_KEYS and key != "name":
                raise ValueError(f"Unknown SAFE setting '{key}'")
            setattr(self, key, val)
        self.validate()

    def validate(self) -> None:
        if self.n_iter < 1:
            raise ValueError(f"n_iter must be at least 1, got {self.n_iter}")
        if self.time_budget_secs is not None and self.time_budget_secs < 0:
            raise ValueError(f"time_budget_secs must be >= 0, got {self.time_budget_secs}")
        if self.gamma is not None and self.gamma < 1:
            raise ValueError(f"gamma must be at least 1, got {self.gamma}")
        if self.mode not in MODES:
            raise ValueError(f"Unknown mode '{self.mode}' (expected one of {MODES})")
        if self.seed < 0:
            raise ValueError(f"seed must be unsigned, got {self.seed}")
        if self.max_arity < 1:
            raise ValueError(f"max_arity must be at least 1, got {self.max_arity}")
        if self.score_mode not in SCORE_MODES:
            raise ValueError(f"Unknown score mode '{self.score_mode}' (expected one of {SCORE_MODES})")
        self.gbdt.validate()
        self.selector.validate()

    def resolved_gamma(self, n_original:int) -> int:
        return self.gamma if self.gamma is not None else max(1, 2 * n_original)

    def to_dict(self) -> dict:
        out = {attr: getattr(self, attr) for attr in self.CONFIG_KEYS}
        out["enabled_operators"] = sorted(self.enabled_operators)
        out["gbdt"] = self.gbdt.to_dict()
        out["selector"] = self.selector.to_dict()
        return out

    def config_digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def from_dict(config_item:dict, name:str = "default") -> 'SafeConfig':
        config = SafeConfig(
            gbdt=GbdtConfig.from_dict(_section_item(config_item, "gbdt", GbdtConfig.CONFIG_KEYS)),
            selector=SelectorConfig.from_dict(_section_item(config_item, "selector", SelectorConfig.CONFIG_KEYS)),
        )
        config.name = config_item.get("name", name)
        _apply_config_keys(config, config_item, SafeConfig.CONFIG_KEYS)
        config.validate()
        return config

    def load(name:str) -> 'SafeConfig':
        """
        Load a named SAFE configuration (see utils.load_named_config for where it is looked up).
        The GBDT and selector settings may either be nested under "gbdt" / "selector" or given at the top level
        (top level settings win over nested ones).
        """
        return SafeConfig.from_dict(load_named_config(name), name)
