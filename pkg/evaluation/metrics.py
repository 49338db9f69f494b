import numpy as np
from scipy.stats import rankdata
from sklearn.linear_model import LogisticRegression
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from data import Dataset, GbdtConfig

SCORER_GBDT = "gbdt"
SCORER_LINEAR = "linear"
SCORERS = [SCORER_GBDT, SCORER_LINEAR]


def auc(scores:np.ndarray, labels:np.ndarray) -> float:
    """
    Area under the ROC curve as the Mann-Whitney statistic: the probability that a random
    positive outscores a random negative, ties counting one half
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError(f"Scores and labels differ in length ({scores.size} vs {labels.size})")
    positive = labels == 1
    n_positive = int(positive.sum())
    n_negative = labels.size - n_positive
    if n_positive == 0 or n_negative == 0:
        raise ValueError("AUC needs at least one positive and one negative label")

    ## Tied scores share their average rank
    ranks = rankdata(scores, method="average")
    u_statistic = ranks[positive].sum() - n_positive * (n_positive + 1) / 2.0
    return float(u_statistic / (n_positive * n_negative))


def evaluate_auc(train:Dataset, test:Dataset, scorer:str = SCORER_GBDT, gbdt_cfg:GbdtConfig = None) -> float:
    """
    Fit the downstream scorer on the training data and return its AUC on the test data.
    gbdt: the built-in boosted ensemble; linear: logistic regression on standardised columns.
    """
    train.require_both_classes("evaluation training")
    test_labels = test.require_both_classes("evaluation")
    test = test.select(train.names)

    if scorer == SCORER_GBDT:
        from engine import gbdt
        ensemble = gbdt.train(train, None, gbdt_cfg)
        return auc(ensemble.predict_margin(test), test_labels)

    if scorer == SCORER_LINEAR:
        model = make_pipeline(StandardScaler(), LogisticRegression(max_iter=1000))
        model.fit(train.values, train.labels)
        return auc(model.decision_function(test.values), test_labels)

    raise ValueError(f"Unknown scorer '{scorer}' (expected one of {SCORERS})")
