import logging
from typing import Callable

import numpy as np

from operators import arithmetic


class Operator:
    name:str
    arity:int
    commutative:bool
    evaluator:Callable[..., np.ndarray]
    """Pure elementwise function over `arity` float64 arrays"""
    enabled_by_default:bool = True
    description:str = None

    def __init__(self, name:str, arity:int, commutative:bool, evaluator:Callable[..., np.ndarray], enabled_by_default:bool = True, description:str = None) -> None:
        self.name = name
        self.arity = arity
        self.commutative = commutative
        self.evaluator = evaluator
        self.enabled_by_default = enabled_by_default
        self.description = description

    def __call__(self, *columns:np.ndarray) -> np.ndarray:
        if len(columns) != self.arity:
            raise ValueError(f"Operator '{self.name}' takes {self.arity} argument(s), got {len(columns)}")
        return self.evaluator(*columns)

    def __repr__(self) -> str:
        return f"Operator({self.name}, arity={self.arity}, commutative={self.commutative})"


class OperatorRegistry:
    """
    Named feature operators. Non commutative operators are registered once per argument order
    (eg. sub and rsub) so that an unordered feature combination yields every distinct result.
    """

    def __init__(self, load_defaults:bool = True) -> None:
        self.operators:dict[str, Operator] = dict()
        if load_defaults:
            self.__load_base_operators()

    def register_operator(self, name:str, arity:int, evaluator:Callable[..., np.ndarray], commutative:bool = False, enabled_by_default:bool = True, description:str = None) -> Operator:
        if not callable(evaluator):
            raise ValueError(f"Evaluator {evaluator} for operator '{name}' is not callable")
        if arity < 1:
            raise ValueError(f"Operator '{name}' must take at least one argument")
        if name in self.operators:
            raise ValueError(f"Operator '{name}' is already registered")
        if commutative and arity < 2:
            raise ValueError(f"Unary operator '{name}' cannot be commutative")

        operator = Operator(name, arity, commutative, evaluator, enabled_by_default, description)
        self.operators[name] = operator
        logging.debug(f"Registered operator {operator}")
        return operator

    def default_enabled(self) -> list[str]:
        return [name for name, op in self.operators.items() if op.enabled_by_default]

    def resolve_enabled(self, enabled:list[str]|set[str]|None) -> list[Operator]:
        """
        The enabled operators in registration order, failing on unknown names
        """
        if enabled is None:
            enabled = self.default_enabled()
        unknown = sorted(set(enabled) - set(self.operators))
        if len(unknown) > 0:
            raise ValueError(f"Unknown operator(s): {unknown}")
        return [op for name, op in self.operators.items() if name in enabled]

    def arity_counts(self, enabled:list[str]|set[str]|None = None) -> dict[int, int]:
        counts = {}
        for op in self.resolve_enabled(enabled):
            counts[op.arity] = counts.get(op.arity, 0) + 1
        return counts

    def __getitem__(self, name:str) -> Operator:
        if name not in self.operators:
            raise ValueError(f"No operator registered with the name: {name}")
        return self.operators[name]

    def __contains__(self, name:str) -> bool:
        return name in self.operators

    def __iter__(self):
        return iter(self.operators.values())

    def __len__(self) -> int:
        return len(self.operators)

    def __load_base_operators(self):
        self.register_operator("add", 2, arithmetic.add, commutative=True, description="a + b")
        self.register_operator("sub", 2, arithmetic.sub, description="a - b")
        self.register_operator("rsub", 2, arithmetic.rsub, description="b - a")
        self.register_operator("mul", 2, arithmetic.mul, commutative=True, description="a * b")
        self.register_operator("div", 2, arithmetic.div, description="a / b (0 when |b| < 1e-12)")
        self.register_operator("rdiv", 2, arithmetic.rdiv, description="b / a (0 when |a| < 1e-12)")

        self.register_operator("log1p_abs", 1, arithmetic.log1p_abs, enabled_by_default=False, description="ln(1 + |a|)")
        self.register_operator("square", 1, arithmetic.square, enabled_by_default=False, description="a * a")
        self.register_operator("sqrt_abs", 1, arithmetic.sqrt_abs, enabled_by_default=False, description="sqrt(|a|)")
        self.register_operator("sigmoid", 1, arithmetic.sigmoid, enabled_by_default=False, description="1 / (1 + e^-a)")
        self.register_operator("tanh", 1, arithmetic.tanh, enabled_by_default=False, description="tanh(a)")
        self.register_operator("round", 1, arithmetic.round_half_even, enabled_by_default=False, description="round half to even")


def default_registry() -> OperatorRegistry:
    return OperatorRegistry()


GLOBAL_OPERATOR_REGISTRY = OperatorRegistry()
