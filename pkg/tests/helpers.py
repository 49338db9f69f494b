import numpy as np

from data import Dataset


def make_dataset(n_rows:int, n_features:int, seed:int = 0, label_fn = None) -> Dataset:
    """
    Uniform(-1, 1) noise columns x1..xM; the label defaults to 1[x1 * x2 > 0]
    """
    rng = np.random.default_rng(seed)
    values = rng.uniform(-1.0, 1.0, size=(n_rows, n_features))
    names = [f"x{i + 1}" for i in range(n_features)]
    if label_fn is None:
        labels = (values[:, 0] * values[:, 1] > 0).astype(int)
    else:
        labels = label_fn(values, rng).astype(int)
    return Dataset(names, values, labels)
