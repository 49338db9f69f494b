
from .dataset import Dataset, SplitSpec, ColumnStats, load_csv, from_frame, write_csv, split, column_stats, MISSING_REJECT, MISSING_IMPUTE_MEAN, MISSING_POLICIES, DEFAULT_LABEL_COLUMN
from .safe_config import GbdtConfig, SelectorConfig, SafeConfig, IV_STANDARD_LOG, IV_LITERAL, IV_FORMULAS, IV_FORMULA_ALIASES, SCORE_GAIN_RATIO, SCORE_GAIN, SCORE_MODES, MODE_SAFE, MODE_RAND, MODE_IMP, MODE_EXHAUSTIVE, MODES, DEFAULT_BINARY_OPERATORS
from .feature_def import FeatureDef, TransformPlan, parse_feature, serialize, deserialize, PLAN_FORMAT, PLAN_VERSION
from .reports import SelectionReport, PrunePair, IterationRecord, IterationTrace
