import json

import regex

PLAN_FORMAT = "safe-psi"
PLAN_VERSION = 1

## Base names matching this are written bare, anything else is written as a JSON string literal
_BARE_NAME = regex.compile(r'[^\s(),"\\]+')
_TOKEN = regex.compile(r'\s*(?:(?P<string>"(?:[^"\\]|\\.)*")|(?P<open>\()|(?P<close>\))|(?P<comma>,)|(?P<bare>[^\s(),"\\]+))')


class FeatureDef:
    """
    Either a base (original) column, or an operator applied to ordered parent definitions.
    The canonical name `op(parent1,parent2)` fully determines the computation.
    """
    base_name:str|None = None
    operator_name:str|None = None
    parents:tuple['FeatureDef', ...] = ()

    def __init__(self, base_name:str|None = None, operator_name:str|None = None, parents:list['FeatureDef'] = None) -> None:
        if (base_name is None) == (operator_name is None):
            raise ValueError("A feature definition is either a base column or an operator application")
        if base_name is not None and base_name == "":
            raise ValueError("Base feature names must be non-empty")
        if operator_name is not None and not parents:
            raise ValueError(f"Operator '{operator_name}' needs at least one parent feature")
        self.base_name = base_name
        self.operator_name = operator_name
        self.parents = tuple(parents or ())
        self._canonical = self.__render()

    def base(name:str) -> 'FeatureDef':
        return FeatureDef(base_name=name)

    def derived(operator_name:str, parents:list['FeatureDef']) -> 'FeatureDef':
        return FeatureDef(operator_name=operator_name, parents=parents)

    @property
    def is_base(self) -> bool:
        return self.base_name is not None

    @property
    def canonical_name(self) -> str:
        return self._canonical

    @property
    def name(self) -> str:
        """
        Column name of the feature: the raw name of a base column, the canonical expression otherwise
        """
        return self.base_name if self.is_base else self._canonical

    @property
    def depth(self) -> int:
        return 0 if self.is_base else 1 + max(p.depth for p in self.parents)

    def base_names(self) -> set[str]:
        if self.is_base:
            return {self.base_name}
        names = set()
        for parent in self.parents:
            names |= parent.base_names()
        return names

    def operator_names(self) -> set[str]:
        if self.is_base:
            return set()
        names = {self.operator_name}
        for parent in self.parents:
            names |= parent.operator_names()
        return names

    def __render(self) -> str:
        if self.is_base:
            return self.base_name if _BARE_NAME.fullmatch(self.base_name) else json.dumps(self.base_name)
        return f"{self.operator_name}({','.join(p.canonical_name for p in self.parents)})"

    def __eq__(self, other:object) -> bool:
        return isinstance(other, FeatureDef) and other._canonical == self._canonical

    def __hash__(self) -> int:
        return hash(self._canonical)

    def __repr__(self) -> str:
        return f"FeatureDef({self._canonical})"


def parse_feature(expression:str) -> FeatureDef:
    """
    Parse a canonical feature expression, eg. `mul(a,sub(b,"c d"))`
    """
    tokens = []
    pos = 0
    while pos < len(expression):
        if expression[pos:].strip() == "":
            break
        match = _TOKEN.match(expression, pos)
        if match is None:
            raise ValueError(f"Malformed feature expression '{expression}' at position {pos}")
        tokens.append((match.lastgroup, match.group(match.lastgroup)))
        pos = match.end()

    def parse_at(i:int) -> tuple[FeatureDef, int]:
        if i >= len(tokens):
            raise ValueError(f"Unexpected end of feature expression '{expression}'")
        kind, text = tokens[i]
        if kind == "string":
            return FeatureDef.base(json.loads(text)), i + 1
        if kind != "bare":
            raise ValueError(f"Unexpected '{text}' in feature expression '{expression}'")
        if i + 1 < len(tokens) and tokens[i + 1][0] == "open":
            parents = []
            i += 2
            while True:
                parent, i = parse_at(i)
                parents.append(parent)
                if i >= len(tokens):
                    raise ValueError(f"Unclosed '(' in feature expression '{expression}'")
                if tokens[i][0] == "close":
                    return FeatureDef.derived(text, parents), i + 1
                if tokens[i][0] != "comma":
                    raise ValueError(f"Expected ',' or ')' in feature expression '{expression}'")
                i += 1
        return FeatureDef.base(text), i + 1

    feature, end = parse_at(0)
    if end != len(tokens):
        raise ValueError(f"Trailing input in feature expression '{expression}'")
    return feature


class TransformPlan:
    """
    The feature generation function: an ordered list of feature definitions over the original columns
    """
    features:list[FeatureDef]
    version:int = PLAN_VERSION
    provenance:dict[str, any] = None

    def __init__(self, features:list[FeatureDef], provenance:dict[str, any] = None, version:int = PLAN_VERSION) -> None:
        seen = set()
        seen_names = set()
        for feature in features:
            if feature.canonical_name in seen:
                raise ValueError(f"Duplicate feature '{feature.canonical_name}' in plan")
            if feature.name in seen_names:
                raise ValueError(f"Duplicate column name '{feature.name}' in plan")
            seen.add(feature.canonical_name)
            seen_names.add(feature.name)
        self.features = list(features)
        self.provenance = dict(provenance or {})
        self.version = version

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def base_names(self) -> list[str]:
        names = set()
        for feature in self.features:
            names |= feature.base_names()
        return sorted(names)

    def operators_used(self) -> list[str]:
        names = set()
        for feature in self.features:
            names |= feature.operator_names()
        return sorted(names)

    def derived_features(self) -> list[FeatureDef]:
        return [f for f in self.features if not f.is_base]

    def __len__(self) -> int:
        return len(self.features)

    def __eq__(self, other:object) -> bool:
        return isinstance(other, TransformPlan) \
            and [f.canonical_name for f in other.features] == [f.canonical_name for f in self.features] \
            and other.version == self.version \
            and other.provenance == self.provenance

    def __repr__(self) -> str:
        return f"TransformPlan({', '.join(f.canonical_name for f in self.features)})"


def serialize(plan:TransformPlan) -> bytes:
    document = {
        "format": PLAN_FORMAT,
        "version": plan.version,
        "operators": plan.operators_used(),
        "features": [f.canonical_name for f in plan.features],
        "provenance": plan.provenance,
    }
    return (json.dumps(document, indent=2, sort_keys=False) + "\n").encode("utf-8")


def deserialize(document:bytes|str, registry = None) -> TransformPlan:
    """
    Parse a plan document, checking the version and that every operator is registered with the right arity
    """
    if registry is None:
        from operator_registry import GLOBAL_OPERATOR_REGISTRY
        registry = GLOBAL_OPERATOR_REGISTRY

    try:
        item = json.loads(document.decode("utf-8") if isinstance(document, bytes) else document)
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ValueError(f"Malformed plan document: {e}")
    if not isinstance(item, dict) or item.get("format") != PLAN_FORMAT:
        raise ValueError(f"Malformed plan document: expected a '{PLAN_FORMAT}' object")
    if item.get("version") != PLAN_VERSION:
        raise ValueError(f"Plan version mismatch: document has {item.get('version')!r}, expected {PLAN_VERSION}")

    expressions = item.get("features")
    if not isinstance(expressions, list) or not all(isinstance(e, str) for e in expressions):
        raise ValueError("Malformed plan document: 'features' must be a list of expressions")
    provenance = item.get("provenance", {})
    if not isinstance(provenance, dict):
        raise ValueError("Malformed plan document: 'provenance' must be an object")

    features = [parse_feature(e) for e in expressions]
    for feature in features:
        _check_operators(feature, registry)
    return TransformPlan(features, provenance, item["version"])


def _check_operators(feature:FeatureDef, registry) -> None:
    if feature.is_base:
        return
    if feature.operator_name not in registry:
        raise ValueError(f"Unknown operator '{feature.operator_name}' in plan feature '{feature.canonical_name}'")
    arity = registry[feature.operator_name].arity
    if arity != len(feature.parents):
        raise ValueError(f"Operator '{feature.operator_name}' takes {arity} argument(s), plan feature '{feature.canonical_name}' gives {len(feature.parents)}")
    for parent in feature.parents:
        _check_operators(parent, registry)
