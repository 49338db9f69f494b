### Elementwise evaluators behind the registered feature operators.
### Every evaluator is total over finite float64 input: a zero denominator yields 0 and
### results that overflow the float64 range are mapped to 0 as well.
import numpy as np
from scipy.special import expit

ZERO_DENOMINATOR = 1e-12


def _finite(values:np.ndarray) -> np.ndarray:
    return np.where(np.isfinite(values), values, 0.0)


def add(a:np.ndarray, b:np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        return _finite(a + b)

def sub(a:np.ndarray, b:np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        return _finite(a - b)

def rsub(a:np.ndarray, b:np.ndarray) -> np.ndarray:
    return sub(b, a)

def mul(a:np.ndarray, b:np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        return _finite(a * b)

def div(a:np.ndarray, b:np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    safe = np.abs(b) >= ZERO_DENOMINATOR
    out = np.zeros(np.broadcast(a, b).shape)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        np.divide(a, b, out=out, where=safe)
    return _finite(out)

def rdiv(a:np.ndarray, b:np.ndarray) -> np.ndarray:
    return div(b, a)


def log1p_abs(a:np.ndarray) -> np.ndarray:
    return np.log1p(np.abs(a))

def square(a:np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return _finite(np.square(a))

def sqrt_abs(a:np.ndarray) -> np.ndarray:
    return np.sqrt(np.abs(a))

def sigmoid(a:np.ndarray) -> np.ndarray:
    return expit(a)

def tanh(a:np.ndarray) -> np.ndarray:
    return np.tanh(a)

def round_half_even(a:np.ndarray) -> np.ndarray:
    return np.round(a)
