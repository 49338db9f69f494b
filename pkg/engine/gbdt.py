import math
import logging

import numpy as np
from scipy.special import expit

from data import Dataset, GbdtConfig
from utils import parallel_map


class TreeNode:
    node_id:int
    depth:int

    feature_id:int|None = None
    """Index (into the ensemble feature names) of the split feature, None for a leaf"""
    split_value:float|None = None
    """Rows with value < split_value go left, the rest go right"""
    gain:float|None = None
    left:'TreeNode' = None
    right:'TreeNode' = None

    weight:float|None = None
    """Raw leaf weight -G/(H+lambda), the learning rate is applied at prediction time"""

    n_rows:int = 0
    grad_sum:float = 0.0
    hess_sum:float = 0.0

    def __init__(self, node_id:int, depth:int) -> None:
        self.node_id = node_id
        self.depth = depth

    @property
    def is_leaf(self) -> bool:
        return self.feature_id is None

    def walk(self):
        """
        Depth first (left before right) iteration over the nodes of the tree
        """
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)


class SplitRecord:
    tree_index:int
    node_id:int
    feature_id:int
    gain:float
    split_value:float

    def __init__(self, tree_index:int, node_id:int, feature_id:int, gain:float, split_value:float) -> None:
        self.tree_index = tree_index
        self.node_id = node_id
        self.feature_id = feature_id
        self.gain = gain
        self.split_value = split_value


class TreeEnsemble:
    trees:list[TreeNode]
    base_score:float
    learning_rate:float
    feature_names:list[str]
    split_records:list[SplitRecord]
    train_loss:list[float]
    """Training log-loss before the first tree and after every boosting round"""
    valid_loss:list[float]
    """Validation log-loss per round (empty when no validation data was given)"""

    def __init__(self, feature_names:list[str], base_score:float, learning_rate:float) -> None:
        self.trees = []
        self.feature_names = list(feature_names)
        self.base_score = base_score
        self.learning_rate = learning_rate
        self.split_records = []
        self.train_loss = []
        self.valid_loss = []

    @property
    def n_internal_nodes(self) -> int:
        return len(self.split_records)

    def used_features(self) -> list[str]:
        """
        Names of the split features, in feature order
        """
        used = sorted({r.feature_id for r in self.split_records})
        return [self.feature_names[f] for f in used]

    def predict_margin(self, d:Dataset) -> np.ndarray:
        return predict_margin(self, d)

    def feature_importance(self) -> dict[str, float]:
        return feature_importance(self)

    def dump(self) -> str:
        """
        Human readable listing of every node, one per line:
        tree=<t> node=<id> depth=<d> feature=<name> threshold=<v> gain=<g> | leaf weight=<w> rows=<n>
        """
        lines = [f"base_score={self.base_score!r} learning_rate={self.learning_rate!r} trees={len(self.trees)}"]
        for t, tree in enumerate(self.trees):
            for node in tree.walk():
                if node.is_leaf:
                    lines.append(f"tree={t} node={node.node_id} depth={node.depth} leaf weight={node.weight!r} rows={node.n_rows}")
                else:
                    lines.append(f"tree={t} node={node.node_id} depth={node.depth} feature={self.feature_names[node.feature_id]} "
                                 f"threshold={node.split_value!r} gain={node.gain!r} rows={node.n_rows} "
                                 f"left={node.left.node_id} right={node.right.node_id}")
        return "\n".join(lines) + "\n"


def _log_loss(y:np.ndarray, margin:np.ndarray) -> float:
    ## log(1 + e^m) - y*m, written to stay finite for large margins
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


def _partition_rows(rows:np.ndarray, row_node:np.ndarray, counts:np.ndarray) -> np.ndarray:
    """
    Regroup a node-grouped row order for the next level. Rows that ended in a leaf are dropped and
    every split block becomes its left child's rows followed by its right child's rows, each in
    their previous relative order. Child positions are 2j (left) and 2j+1 (right) for the j-th split.
    """
    keys = row_node[rows]
    keep = keys >= 0
    rows = rows[keep]
    keys = keys[keep]

    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    out = np.empty_like(rows)
    for side in (0, 1):
        mask = (keys & 1) == side
        side_keys = keys[mask]
        ## Keys of one side are non-decreasing along the order, so a row's rank inside its child
        ## is its rank on this side minus the rows of this side in earlier children
        side_counts = counts[side::2]
        before = np.concatenate(([0], np.cumsum(side_counts)[:-1]))
        rank = np.arange(side_keys.size) - before[side_keys // 2]
        out[starts[side_keys] + rank] = rows[mask]
    return out


class _TreeGrower:
    """
    Grows one regression tree level by level with exact greedy split search.
    Every feature keeps its rows grouped by node (in the order of the level's active nodes) and
    sorted by value inside each node. Splitting a node stably partitions its block into the left
    then the right child, so the value order carries over to the next level without re-sorting.
    """

    def __init__(self, columns:list[np.ndarray], order:list[np.ndarray], g:np.ndarray, h:np.ndarray, cfg:GbdtConfig, tree_index:int) -> None:
        self.columns = columns
        self.grouped = list(order)
        self.g = g
        self.h = h
        self.cfg = cfg
        self.tree_index = tree_index

    def grow(self) -> tuple[TreeNode, np.ndarray, list[SplitRecord]]:
        n = len(self.g)
        lam = self.cfg.reg_lambda
        records = []

        root = TreeNode(0, 0)
        active = [root]
        row_node = np.zeros(n, dtype=np.int32)  ## position in `active`, -1 once the row sits in a leaf
        row_weight = np.zeros(n)
        next_id = 1

        for depth in range(self.cfg.max_depth + 1):
            if len(active) == 0:
                break
            k = len(active)
            live = row_node >= 0
            G = np.bincount(row_node[live], weights=self.g[live], minlength=k)
            H = np.bincount(row_node[live], weights=self.h[live], minlength=k)
            C = np.bincount(row_node[live], minlength=k)

            if depth < self.cfg.max_depth:
                best_gain, best_feature, best_threshold = self._find_best_splits(k, G, H, C)
            else:
                best_gain = np.full(k, -np.inf)
                best_feature = np.full(k, -1)
                best_threshold = np.full(k, np.nan)

            next_active = []
            next_row_node = np.full(n, -1, dtype=np.int32)
            for i, node in enumerate(active):
                node.grad_sum = float(G[i])
                node.hess_sum = float(H[i])
                node.n_rows = int(C[i])
                rows = np.flatnonzero(row_node == i)

                if best_feature[i] >= 0 and best_gain[i] > 0:
                    feature = int(best_feature[i])
                    node.feature_id = feature
                    node.split_value = float(best_threshold[i])
                    node.gain = float(best_gain[i])
                    node.left = TreeNode(next_id, depth + 1)
                    node.right = TreeNode(next_id + 1, depth + 1)
                    next_id += 2

                    go_left = self.columns[feature][rows] < node.split_value
                    ## Children take consecutive positions, the left one even and the right one odd
                    next_row_node[rows[go_left]] = len(next_active)
                    next_active.append(node.left)
                    next_row_node[rows[~go_left]] = len(next_active)
                    next_active.append(node.right)
                    records.append(SplitRecord(self.tree_index, node.node_id, feature, node.gain, node.split_value))
                else:
                    node.weight = float(-G[i] / (H[i] + lam)) if H[i] + lam > 0 else 0.0
                    row_weight[rows] = node.weight

            active = next_active
            row_node = next_row_node
            ## The last level only makes leaves, so its rows need no regrouping
            if len(active) > 0 and depth + 1 < self.cfg.max_depth:
                next_counts = np.bincount(row_node[row_node >= 0], minlength=len(active))
                self.grouped = parallel_map(lambda rows: _partition_rows(rows, row_node, next_counts), self.grouped)

        return root, row_weight, records

    def _find_best_splits(self, k:int, G:np.ndarray, H:np.ndarray, C:np.ndarray):
        starts = np.concatenate(([0], np.cumsum(C)[:-1]))
        ## Node position of every slot of a grouped row order, the same for all features
        nodes = np.repeat(np.arange(k), C)
        same_node = nodes[:-1] == nodes[1:]
        results = parallel_map(lambda f: self._best_for_feature(f, nodes, same_node, starts, k, G, H, C), range(len(self.columns)))

        best_gain = np.full(k, -np.inf)
        best_feature = np.full(k, -1, dtype=np.int64)
        best_threshold = np.full(k, np.nan)
        ## Features are visited in ascending order and only a strictly better gain replaces
        ## the incumbent, so ties go to the lowest feature id
        for f, (gain, threshold) in enumerate(results):
            better = gain > best_gain
            best_gain[better] = gain[better]
            best_feature[better] = f
            best_threshold[better] = threshold[better]
        return best_gain, best_feature, best_threshold

    def _best_for_feature(self, f:int, nodes:np.ndarray, same_node:np.ndarray, starts:np.ndarray, k:int, G:np.ndarray, H:np.ndarray, C:np.ndarray):
        cfg = self.cfg
        lam = cfg.reg_lambda
        best_gain = np.full(k, -np.inf)
        best_threshold = np.full(k, np.nan)

        rows = self.grouped[f]
        if rows.size < 2:
            return best_gain, best_threshold

        x = self.columns[f][rows]
        cg = np.cumsum(self.g[rows])
        ch = np.cumsum(self.h[rows])
        g_before = np.where(starts > 0, cg[np.maximum(starts - 1, 0)], 0.0)
        h_before = np.where(starts > 0, ch[np.maximum(starts - 1, 0)], 0.0)

        ## A candidate split sits between positions i and i+1 of the same node with distinct values
        i = np.flatnonzero(same_node & (x[:-1] < x[1:]))
        if i.size == 0:
            return best_gain, best_threshold
        node_c = nodes[i]
        if cfg.min_child_rows > 1:
            n_left = i - starts[node_c] + 1
            n_right = C[node_c] - n_left
            allowed = (n_left >= cfg.min_child_rows) & (n_right >= cfg.min_child_rows)
            i = i[allowed]
            node_c = node_c[allowed]
            if i.size == 0:
                return best_gain, best_threshold

        GL = cg[i] - g_before[node_c]
        HL = ch[i] - h_before[node_c]
        GR = G[node_c] - GL
        HR = H[node_c] - HL
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - G[node_c] ** 2 / (H[node_c] + lam)) - cfg.min_gain
        gain = np.where(np.isfinite(gain), gain, -np.inf)

        ## Candidates are grouped by node and in ascending value order inside each node,
        ## so the first maximum of a segment is the node's lowest best threshold
        segment_starts = np.flatnonzero(np.concatenate(([True], node_c[1:] != node_c[:-1])))
        segment_max = np.maximum.reduceat(gain, segment_starts)
        segment_nodes = node_c[segment_starts]
        best_gain[segment_nodes] = segment_max

        segment_lengths = np.diff(np.append(segment_starts, i.size))
        winners = np.flatnonzero(gain == np.repeat(segment_max, segment_lengths))
        segment_of = np.searchsorted(segment_starts, winners, side="right") - 1
        first = winners[np.concatenate(([True], segment_of[1:] != segment_of[:-1]))]

        w = i[first]
        threshold = (x[w] + x[w + 1]) / 2.0
        ## Midpoints of adjacent floats can round down onto the lower value
        best_threshold[node_c[first]] = np.where(threshold > x[w], threshold, x[w + 1])
        return best_gain, best_threshold


def _tree_output(tree:TreeNode, columns:dict[int, np.ndarray], n_rows:int) -> np.ndarray:
    out = np.zeros(n_rows)
    stack = [(tree, np.arange(n_rows))]
    while stack:
        node, rows = stack.pop()
        if rows.size == 0:
            continue
        if node.is_leaf:
            out[rows] = node.weight
            continue
        go_left = columns[node.feature_id][rows] < node.split_value
        stack.append((node.left, rows[go_left]))
        stack.append((node.right, rows[~go_left]))
    return out


def _resolve_columns(e:TreeEnsemble, d:Dataset) -> dict[int, np.ndarray]:
    columns = {}
    for feature_id in sorted({r.feature_id for r in e.split_records}):
        name = e.feature_names[feature_id]
        if not d.has_column(name):
            raise KeyError(f"Missing feature column '{name}' required by the ensemble")
        columns[feature_id] = d.column(name)
    return columns


def train(train_set:Dataset, valid:Dataset|None = None, cfg:GbdtConfig|None = None) -> TreeEnsemble:
    """
    Train a gradient boosted ensemble of regression trees on the logistic loss,
    using first and second order gradient statistics and exact greedy split search.
    """
    cfg = cfg if cfg is not None else GbdtConfig()
    cfg.validate()
    if train_set.n_rows == 0:
        raise ValueError("Cannot train on an empty dataset")
    y = train_set.require_both_classes("GBDT training").astype(np.float64)

    X = train_set.values
    positive_rate = float(y.mean())
    ensemble = TreeEnsemble(train_set.names, math.log(positive_rate / (1.0 - positive_rate)), cfg.learning_rate)

    columns = [X[:, f] for f in range(X.shape[1])]
    index_type = np.int32 if train_set.n_rows < 2 ** 31 else np.int64
    order = [np.argsort(column, kind="stable").astype(index_type) for column in columns]
    margin = np.full(train_set.n_rows, ensemble.base_score)
    ensemble.train_loss.append(_log_loss(y, margin))

    valid_y = None
    valid_columns = None
    if valid is not None and valid.n_rows > 0 and valid.labels is not None:
        valid_y = valid.labels.astype(np.float64)
        valid_margin = np.full(valid.n_rows, ensemble.base_score)
        valid_columns = {f: valid.column(name) for f, name in enumerate(ensemble.feature_names)}

    for t in range(cfg.n_trees):
        prob = expit(margin)
        g = prob - y
        h = prob * (1.0 - prob)

        tree, row_weight, records = _TreeGrower(columns, order, g, h, cfg, t).grow()
        ensemble.trees.append(tree)
        ensemble.split_records.extend(records)
        margin = margin + cfg.learning_rate * row_weight
        ensemble.train_loss.append(_log_loss(y, margin))

        if valid_y is not None:
            valid_margin = valid_margin + cfg.learning_rate * _tree_output(tree, valid_columns, valid.n_rows)
            ensemble.valid_loss.append(_log_loss(valid_y, valid_margin))

        logging.debug(f"[gbdt] round {t + 1}/{cfg.n_trees}: {len(records)} split(s), train log-loss {ensemble.train_loss[-1]:.6f}")

    return ensemble


def predict_margin(e:TreeEnsemble, d:Dataset) -> np.ndarray:
    """
    Raw additive score (log-odds) per row; apply a sigmoid to get probabilities
    """
    columns = _resolve_columns(e, d)
    margin = np.full(d.n_rows, e.base_score)
    ## Accumulate tree by tree, the same way as training does
    for tree in e.trees:
        margin = margin + e.learning_rate * _tree_output(tree, columns, d.n_rows)
    return margin


def feature_importance(e:TreeEnsemble) -> dict[str, float]:
    """
    Average split gain per feature over all splits using it (0 for features never used)
    """
    totals = np.zeros(len(e.feature_names))
    counts = np.zeros(len(e.feature_names))
    for record in e.split_records:
        totals[record.feature_id] += record.gain
        counts[record.feature_id] += 1

    return {
        name: float(totals[f] / counts[f]) if counts[f] > 0 else 0.0
        for f, name in enumerate(e.feature_names)
    }
