### This module contains the operator evaluators and the feature synthesis built on top of them.
from . import arithmetic
from .synthesis import generate, apply_plan, plan_generation, compute_planned
