"""From-scratch random forest: bootstrap-sampled CART trees split by Gini.

Each tree trains on a bootstrap sample of size M drawn with replacement.  At
every node a fresh random subset of ``m_features`` feature indexes is
considered; the best split minimizes the weighted child Gini impurity

    gini(p) = sum_k p_k (1 - p_k) = 1 - sum_k p_k^2

over thresholds placed at midpoints between consecutive distinct sorted
values.  Growth stops when a node is pure, falls under ``min_leaf`` samples,
or no split reduces impurity; there is no pruning.  Prediction routes a row
through every tree; each leaf casts its majority class as one vote and the
plurality wins (ties break to the lowest class id).

Randomness comes from numpy's PCG64 with one spawned stream per tree
(SeedSequence(seed, spawn_key=(0, tree_index))), so models are reproducible
byte-for-byte for a given (data, hyperparameters, seed) and independent of
any scheduling order.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelFormatError

MODEL_FORMAT = "forest-model"
MODEL_VERSION = 1

# Spawn-key namespaces keeping per-tree, per-fold, and shuffle streams disjoint.
_STREAM_TREE = 0
_STREAM_FOLD = 1
_STREAM_SHUFFLE = 2


@dataclass(frozen=True)
class Dataset:
    """Feature matrix, integer labels in 0..K-1, and the K class names."""

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise ValueError(f"features must be a nonempty 2-D matrix, got {features.shape}")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must align with feature rows")
        if not np.all(np.isfinite(features)):
            raise ValueError("features must be finite")
        k = len(self.class_names)
        if labels.min() < 0 or labels.max() >= k:
            raise ValueError(f"labels must lie in 0..{k - 1}")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def num_rows(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)


@dataclass
class TreeNode:
    """Internal node (feature_index, threshold, children) or leaf (class_votes)."""

    feature_index: int = -1
    threshold: float = 0.0
    left: "TreeNode" = None
    right: "TreeNode" = None
    class_votes: np.ndarray = None

    @property
    def is_leaf(self) -> bool:
        return self.class_votes is not None


@dataclass
class ForestModel:
    trees: list
    n_trees: int
    m_features: int
    seed: int
    class_names: tuple
    n_features: int
    meta: dict = field(default_factory=dict)

    @property
    def num_classes(self) -> int:
        return len(self.class_names)


def gini(class_probabilities) -> float:
    """Gini impurity of a class distribution; 0 for a pure node."""
    p = np.asarray(class_probabilities, dtype=float)
    if p.size < 1:
        raise ValueError("need at least one class probability")
    if np.any(p < -1e-9):
        raise ValueError(f"probabilities must be nonnegative, got {p}")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities must sum to 1, got {total}")
    return float(1.0 - np.dot(p, p))


def _counts_gini(counts: np.ndarray) -> float:
    n = counts.sum()
    p = counts / n
    return float(1.0 - np.dot(p, p))


def _stream(seed: int, *key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _derived_seed(seed: int, *key) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1, dtype=np.uint64)[0])


def bootstrap_indices(rng: np.random.Generator, num_rows: int) -> np.ndarray:
    """One bootstrap draw: num_rows indexes sampled with replacement."""
    return rng.integers(0, num_rows, size=num_rows)


def _best_split(x_col: np.ndarray, y: np.ndarray, n_classes: int):
    """Best (weighted_gini, threshold) for one feature column, or None.

    Thresholds sit at midpoints between consecutive distinct sorted values;
    scanning in ascending order makes ties resolve to the lowest threshold.
    """
    order = np.argsort(x_col, kind="stable")
    sv = x_col[order]
    sy = y[order]
    n = sv.shape[0]
    boundaries = np.flatnonzero(sv[:-1] < sv[1:])
    if boundaries.size == 0:
        return None
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), sy] = 1.0
    prefix = np.cumsum(onehot, axis=0)
    total = prefix[-1]
    left = prefix[boundaries]
    right = total - left
    nl = left.sum(axis=1)
    nr = n - nl
    gl = 1.0 - np.sum((left / nl[:, None]) ** 2, axis=1)
    gr = 1.0 - np.sum((right / nr[:, None]) ** 2, axis=1)
    weighted = (nl * gl + nr * gr) / n
    best = int(np.argmin(weighted))  # first minimum = lowest threshold
    b = boundaries[best]
    return float(weighted[best]), float((sv[b] + sv[b + 1]) / 2.0)


def _grow(x, y, idx, n_classes, m_features, min_leaf, rng) -> TreeNode:
    counts = np.bincount(y[idx], minlength=n_classes)
    if counts.max() == idx.size or idx.size < min_leaf:
        return TreeNode(class_votes=counts)
    node_gini = _counts_gini(counts)

    feats = np.sort(rng.permutation(x.shape[1])[:m_features])
    best = None  # (weighted_gini, feature, threshold)
    for f in feats:
        found = _best_split(x[idx, f], y[idx], n_classes)
        if found is None:
            continue
        weighted, threshold = found
        if best is None or weighted < best[0]:
            best = (weighted, f, threshold)
    if best is None or best[0] >= node_gini:
        return TreeNode(class_votes=counts)

    _, f, threshold = best
    go_left = x[idx, f] <= threshold
    left = _grow(x, y, idx[go_left], n_classes, m_features, min_leaf, rng)
    right = _grow(x, y, idx[~go_left], n_classes, m_features, min_leaf, rng)
    return TreeNode(feature_index=int(f), threshold=threshold, left=left, right=right)


def default_m_features(n_features: int) -> int:
    """The square-root heuristic for the per-node feature subset size."""
    return max(1, round(np.sqrt(n_features)))


def train(
    data: Dataset,
    n_trees: int = 100,
    m_features: int = None,
    seed: int = 0,
    min_leaf: int = 1,
    meta: dict = None,
) -> ForestModel:
    """Train the forest. Deterministic given (data, hyperparameters, seed)."""
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    m = default_m_features(data.num_features) if m_features is None else int(m_features)
    if not 1 <= m <= data.num_features:
        raise ValueError(f"m_features must lie in 1..{data.num_features}, got {m}")
    trees = []
    for t in range(n_trees):
        rng = _stream(seed, _STREAM_TREE, t)
        idx = bootstrap_indices(rng, data.num_rows)
        trees.append(
            _grow(data.features, data.labels, idx, data.num_classes, m, min_leaf, rng)
        )
    return ForestModel(
        trees=trees,
        n_trees=n_trees,
        m_features=m,
        seed=int(seed),
        class_names=data.class_names,
        n_features=data.num_features,
        meta=dict(meta or {}),
    )


def _route(node: TreeNode, row: np.ndarray) -> np.ndarray:
    while not node.is_leaf:
        node = node.left if row[node.feature_index] <= node.threshold else node.right
    return node.class_votes


def predict(model: ForestModel, feature_row) -> tuple[int, np.ndarray]:
    """Plurality vote over the trees; returns (class id, vote distribution)."""
    row = np.asarray(feature_row, dtype=float)
    if row.shape != (model.n_features,):
        raise ValueError(f"expected a length-{model.n_features} row, got shape {row.shape}")
    if not np.all(np.isfinite(row)):
        raise ValueError("feature row must be finite")
    votes = np.zeros(model.num_classes)
    for tree in model.trees:
        leaf = _route(tree, row)
        votes[int(np.argmax(leaf))] += 1.0  # argmax ties -> lowest class id
    return int(np.argmax(votes)), votes / model.n_trees


def predict_batch(model: ForestModel, rows) -> tuple[np.ndarray, np.ndarray]:
    rows = np.asarray(rows, dtype=float)
    preds = np.empty(rows.shape[0], dtype=int)
    dists = np.empty((rows.shape[0], model.num_classes))
    for i, row in enumerate(rows):
        preds[i], dists[i] = predict(model, row)
    return preds, dists


def evaluate(model: ForestModel, data: Dataset) -> dict:
    """Accuracy, per-class recall, and a confusion matrix (rows = true class)."""
    if data.num_features != model.n_features:
        raise ValueError("dataset and model disagree on the feature dimension")
    preds, _ = predict_batch(model, data.features)
    k = model.num_classes
    confusion = np.zeros((k, k), dtype=int)
    for truth, pred in zip(data.labels, preds):
        confusion[truth, pred] += 1
    row_sums = confusion.sum(axis=1)
    with np.errstate(invalid="ignore"):
        recall = np.where(row_sums > 0, np.diag(confusion) / np.maximum(row_sums, 1), np.nan)
    return {
        "accuracy": float(np.mean(preds == data.labels)),
        "per_class_recall": recall,
        "confusion": confusion,
    }


def stratified_folds(labels: np.ndarray, folds: int, seed: int, class_names) -> list:
    """Deterministic stratified fold assignment; returns a list of index arrays."""
    labels = np.asarray(labels)
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if folds > labels.size:
        raise ValueError("more folds than samples")
    rng = _stream(seed, _STREAM_SHUFFLE)
    assignment = [[] for _ in range(folds)]
    for c in range(len(class_names)):
        members = np.flatnonzero(labels == c)
        if members.size < folds:
            raise ValueError(
                f"class {class_names[c]!r} has {members.size} samples, fewer than {folds} folds"
            )
        members = members[rng.permutation(members.size)]
        for pos, m in enumerate(members):
            assignment[pos % folds].append(int(m))
    return [np.array(sorted(a), dtype=int) for a in assignment]


def cross_validate(
    data: Dataset,
    folds: int,
    n_trees: int = 100,
    m_features: int = None,
    seed: int = 0,
    min_leaf: int = 1,
) -> dict:
    """Stratified k-fold retraining; deterministic given the seed."""
    fold_indices = stratified_folds(data.labels, folds, seed, data.class_names)
    fold_metrics = []
    for f, test_idx in enumerate(fold_indices):
        train_mask = np.ones(data.num_rows, dtype=bool)
        train_mask[test_idx] = False
        train_data = Dataset(
            features=data.features[train_mask],
            labels=data.labels[train_mask],
            class_names=data.class_names,
        )
        test_data = Dataset(
            features=data.features[test_idx],
            labels=data.labels[test_idx],
            class_names=data.class_names,
        )
        model = train(
            train_data,
            n_trees=n_trees,
            m_features=m_features,
            seed=_derived_seed(seed, _STREAM_FOLD, f),
            min_leaf=min_leaf,
        )
        fold_metrics.append(evaluate(model, test_data))
    accuracies = np.array([m["accuracy"] for m in fold_metrics])
    return {
        "mean_accuracy": float(accuracies.mean()),
        "std_accuracy": float(accuracies.std()),
        "fold_accuracies": accuracies,
        "fold_metrics": fold_metrics,
    }


def _write_tree(lines: list, node: TreeNode) -> None:
    if node.is_leaf:
        lines.append("l " + " ".join(str(int(c)) for c in node.class_votes))
    else:
        lines.append(f"n {node.feature_index} {node.threshold!r}")
        _write_tree(lines, node.left)
        _write_tree(lines, node.right)


def save_model(model: ForestModel, path) -> None:
    """Versioned text serialization; float thresholds round-trip exactly via repr."""
    lines = [f"{MODEL_FORMAT} v{MODEL_VERSION}"]
    if model.meta:
        lines.append("meta " + json.dumps(model.meta, sort_keys=True))
    lines.append(f"n_trees {model.n_trees}")
    lines.append(f"m_features {model.m_features}")
    lines.append(f"seed {model.seed}")
    lines.append(f"n_features {model.n_features}")
    for name in model.class_names:
        lines.append(f"class {name}")
    for t, tree in enumerate(model.trees):
        lines.append(f"tree {t}")
        _write_tree(lines, tree)
    lines.append("end")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


class _TokenReader:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise ModelFormatError("unexpected end of model file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def peek(self) -> str:
        if self.pos >= len(self.lines):
            raise ModelFormatError("unexpected end of model file")
        return self.lines[self.pos]


def _read_tree(reader: _TokenReader, n_classes: int) -> TreeNode:
    line = reader.next()
    if line.startswith("l "):
        counts = np.array([int(v) for v in line[2:].split()], dtype=int)
        if counts.shape != (n_classes,):
            raise ModelFormatError(f"leaf holds {counts.shape[0]} counts, expected {n_classes}")
        if counts.sum() < 1:
            raise ModelFormatError("leaf must hold at least one training vote")
        return TreeNode(class_votes=counts)
    if line.startswith("n "):
        parts = line.split()
        if len(parts) != 3:
            raise ModelFormatError(f"malformed node line: {line!r}")
        left = _read_tree(reader, n_classes)
        right = _read_tree(reader, n_classes)
        return TreeNode(
            feature_index=int(parts[1]),
            threshold=float(parts[2]),
            left=left,
            right=right,
        )
    raise ModelFormatError(f"expected a node or leaf line, got {line!r}")


def load_model(path) -> ForestModel:
    with open(path, "r") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines:
        raise ModelFormatError(f"{path}: empty model file")
    header = lines[0].split()
    if len(header) != 2 or header[0] != MODEL_FORMAT:
        raise ModelFormatError(f"{path}: not a {MODEL_FORMAT} file")
    if header[1] != f"v{MODEL_VERSION}":
        raise ModelFormatError(f"{path}: unsupported version {header[1]}")
    reader = _TokenReader(lines)
    reader.next()

    meta = {}
    if reader.peek().startswith("meta "):
        meta = json.loads(reader.next()[5:])

    scalars = {}
    for key in ("n_trees", "m_features", "seed", "n_features"):
        line = reader.next()
        k, _, v = line.partition(" ")
        if k != key:
            raise ModelFormatError(f"{path}: expected {key!r} line, got {line!r}")
        scalars[key] = int(v)

    class_names = []
    while reader.peek().startswith("class "):
        class_names.append(reader.next()[6:])
    if not class_names:
        raise ModelFormatError(f"{path}: no classes declared")

    trees = []
    for t in range(scalars["n_trees"]):
        line = reader.next()
        if line != f"tree {t}":
            raise ModelFormatError(f"{path}: expected 'tree {t}', got {line!r}")
        trees.append(_read_tree(reader, len(class_names)))
    if reader.next() != "end":
        raise ModelFormatError(f"{path}: missing end marker")

    return ForestModel(
        trees=trees,
        n_trees=scalars["n_trees"],
        m_features=scalars["m_features"],
        seed=scalars["seed"],
        class_names=tuple(class_names),
        n_features=scalars["n_features"],
        meta=meta,
    )
