"""
CART-style classification tree (Gini impurity, binary splits) for the
admitted / not-admitted label, plus rule extraction and a text dump.

Split semantics:
  numeric      left  <=> value <  threshold (midpoint of adjacent distinct values)
  categorical  left  <=> value in subset    (exhaustive search for <= 8 categories)
Ties in Gini gain go to the feature earlier in FEATURE_ORDER, then to the
smaller threshold / first subset in enumeration order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import count
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.errors import DataError
from app.models.schemas import PatientRecord, TreeParams

from .features import FEATURES, Feature, format_category, resolve
from .rules import Clause, Condition, Interval, Membership, RuleSet

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_CATEGORIES = 8


def gini(n_pos: float, n: float) -> float:
    if n <= 0:
        return 0.0
    p = n_pos / n
    return 2.0 * p * (1.0 - p)


@dataclass(frozen=True)
class Leaf:
    counts: Tuple[int, int]  # (not admitted, admitted)

    @property
    def prediction(self) -> bool:
        return self.counts[1] > self.counts[0]


@dataclass(frozen=True)
class Split:
    feature: str
    threshold: Optional[float]
    categories: Optional[FrozenSet]
    left: "Node"
    right: "Node"
    counts: Tuple[int, int]
    gain: float

    def goes_left(self, record: PatientRecord) -> bool:
        value = FEATURES[self.feature].value(record)
        if self.threshold is not None:
            return value < self.threshold
        assert self.categories is not None
        return value in self.categories

    def left_condition(self) -> Condition:
        if self.threshold is not None:
            return Interval(self.feature, high=self.threshold)
        return Membership(self.feature, frozenset(self.categories or ()))

    def right_condition(self) -> Condition:
        if self.threshold is not None:
            return Interval(self.feature, low=self.threshold, low_inclusive=True)
        domain = FEATURES[self.feature].domain
        return Membership(self.feature, frozenset(domain) - frozenset(self.categories or ()))


Node = Union[Leaf, Split]


@dataclass(frozen=True)
class DecisionTree:
    root: Node
    features: Tuple[str, ...]
    name: str = "tree"

    def _leaf_for(self, record: PatientRecord) -> Leaf:
        node = self.root
        while isinstance(node, Split):
            node = node.left if node.goes_left(record) else node.right
        return node

    def predict(self, record: PatientRecord) -> bool:
        return self._leaf_for(record).prediction

    def predict_many(self, records: Sequence[PatientRecord]) -> List[bool]:
        return [self.predict(r) for r in records]

    def depth(self) -> int:
        def _depth(node: Node) -> int:
            if isinstance(node, Leaf):
                return 0
            return 1 + max(_depth(node.left), _depth(node.right))
        return _depth(self.root)

    def leaves(self) -> List[Leaf]:
        out: List[Leaf] = []

        def _walk(node: Node) -> None:
            if isinstance(node, Leaf):
                out.append(node)
            else:
                _walk(node.left)
                _walk(node.right)

        _walk(self.root)
        return out

    def importance(self) -> Dict[str, float]:
        """Share of the total weighted Gini decrease contributed by each feature."""
        total_n = sum(self.root.counts)
        raw = {f: 0.0 for f in self.features}

        def _walk(node: Node) -> None:
            if isinstance(node, Split):
                raw[node.feature] += sum(node.counts) / total_n * node.gain
                _walk(node.left)
                _walk(node.right)

        _walk(self.root)
        total = sum(raw.values())
        return {f: (v / total if total > 0 else 0.0) for f, v in raw.items()}

    def render(self) -> str:
        """Indented dump, one condition per line; leaves end with '*'."""
        lines = [f"{self.name}: features={', '.join(self.features)}",
                 "node), split, n, yhat (not admitted/admitted)"]

        def _label(node: Node) -> str:
            no, yes = node.counts
            pred = "yes" if yes > no else "no"
            return f"{no + yes} {pred} ({no}/{yes})"

        def _walk(node: Node, number: int, text: str, indent: int) -> None:
            star = " *" if isinstance(node, Leaf) else ""
            lines.append(f"{'  ' * indent}{number}) {text} {_label(node)}{star}")
            if isinstance(node, Split):
                _walk(node.left, 2 * number, node.left_condition().render(), indent + 1)
                _walk(node.right, 2 * number + 1, node.right_condition().render(), indent + 1)

        _walk(self.root, 1, "root", 0)
        imp = self.importance()
        lines.append("importance: " + ", ".join(f"{f}={imp[f]:.3f}" for f in self.features))
        return "\n".join(lines) + "\n"


# -----------------------------
# Training
# -----------------------------
@dataclass
class _Candidate:
    gain: float
    feature: str
    threshold: Optional[float] = None
    categories: Optional[FrozenSet] = None


class _Encoded:
    """Column-wise view of the training records."""

    def __init__(self, records: Sequence[PatientRecord], features: List[Feature]) -> None:
        self.features = features
        self.y = np.asarray([r.admitted for r in records], dtype=np.int64)
        self.columns: Dict[str, np.ndarray] = {}
        for f in features:
            if f.numeric:
                self.columns[f.name] = np.asarray([f.value(r) for r in records], dtype=float)
            else:
                code = {v: i for i, v in enumerate(f.domain)}
                self.columns[f.name] = np.asarray([code[f.value(r)] for r in records], dtype=np.int64)


def _best_numeric(x: np.ndarray, y: np.ndarray, parent: float, min_leaf: int) -> Optional[Tuple[float, float]]:
    n = len(x)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n_left = np.arange(1, n)
    pos_left = np.cumsum(ys)[:-1].astype(float)
    total_pos = float(ys.sum())
    valid = (xs[:-1] != xs[1:]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
    if not valid.any():
        return None
    n_right = n - n_left
    p_l = pos_left / n_left
    p_r = (total_pos - pos_left) / n_right
    weighted = (n_left * 2 * p_l * (1 - p_l) + n_right * 2 * p_r * (1 - p_r)) / n
    gains = np.where(valid, parent - weighted, -np.inf)
    i = int(np.argmax(gains))  # first maximum = smallest threshold
    return float(gains[i]), float((xs[i] + xs[i + 1]) / 2.0)


def _category_subsets(present: List[int], n_c: Dict[int, int], pos_c: Dict[int, int]) -> List[Tuple[int, ...]]:
    k = len(present)
    if k <= EXHAUSTIVE_MAX_CATEGORIES:
        subsets = []
        for mask in range(1, 2 ** k - 1):
            if mask & 1:  # first present category always on the left
                subsets.append(tuple(present[j] for j in range(k) if mask >> j & 1))
        return subsets
    # Ordering by admit rate finds the optimal binary split for a two-class label.
    ranked = sorted(present, key=lambda c: (pos_c[c] / n_c[c], present.index(c)))
    return [tuple(ranked[: j + 1]) for j in range(k - 1)]


def _best_categorical(
    codes: np.ndarray, y: np.ndarray, parent: float, min_leaf: int, domain: Tuple
) -> Optional[Tuple[float, FrozenSet]]:
    n = len(codes)
    present = sorted(set(codes.tolist()))
    if len(present) < 2:
        return None
    n_c = {c: int((codes == c).sum()) for c in present}
    pos_c = {c: int(y[codes == c].sum()) for c in present}
    total_pos = sum(pos_c.values())
    best: Optional[Tuple[float, Tuple[int, ...]]] = None
    for subset in _category_subsets(present, n_c, pos_c):
        nl = sum(n_c[c] for c in subset)
        nr = n - nl
        if nl < min_leaf or nr < min_leaf:
            continue
        pl = sum(pos_c[c] for c in subset)
        gain = parent - (nl * gini(pl, nl) + nr * gini(total_pos - pl, nr)) / n
        if best is None or gain > best[0]:
            best = (gain, subset)
    if best is None:
        return None
    return best[0], frozenset(domain[c] for c in best[1])


def _find_split(data: _Encoded, idx: np.ndarray, params: TreeParams) -> Optional[_Candidate]:
    y = data.y[idx]
    parent = gini(float(y.sum()), float(len(y)))
    best: Optional[_Candidate] = None
    for f in data.features:
        col = data.columns[f.name][idx]
        if f.numeric:
            found = _best_numeric(col, y, parent, params.min_leaf)
            if found and (best is None or found[0] > best.gain):
                best = _Candidate(gain=found[0], feature=f.name, threshold=found[1])
        else:
            found_c = _best_categorical(col, y, parent, params.min_leaf, f.domain)
            if found_c and (best is None or found_c[0] > best.gain):
                best = _Candidate(gain=found_c[0], feature=f.name, categories=found_c[1])
    return best


def train_tree(
    train: Sequence[PatientRecord],
    features: Sequence[str],
    params: Optional[TreeParams] = None,
    name: str = "tree",
) -> DecisionTree:
    if not train:
        raise DataError("cannot train a tree on an empty training set")
    params = params or TreeParams()
    feats = resolve(features)
    data = _Encoded(train, feats)
    splits = count()

    def _grow(idx: np.ndarray, depth: int) -> Node:
        y = data.y[idx]
        counts = (int(len(y) - y.sum()), int(y.sum()))
        if depth >= params.max_depth or min(counts) == 0 or len(idx) < 2 * params.min_leaf:
            return Leaf(counts)
        cand = _find_split(data, idx, params)
        if cand is None or cand.gain <= 0 or cand.gain < params.min_gini_gain:
            return Leaf(counts)
        col = data.columns[cand.feature][idx]
        if cand.threshold is not None:
            go_left = col < cand.threshold
        else:
            domain = FEATURES[cand.feature].domain
            left_codes = [i for i, v in enumerate(domain) if v in (cand.categories or ())]
            go_left = np.isin(col, left_codes)
        next(splits)
        return Split(
            feature=cand.feature,
            threshold=cand.threshold,
            categories=cand.categories,
            left=_grow(idx[go_left], depth + 1),
            right=_grow(idx[~go_left], depth + 1),
            counts=counts,
            gain=cand.gain,
        )

    root = _grow(np.arange(len(train)), 0)
    tree = DecisionTree(root=root, features=tuple(f.name for f in feats), name=name)
    root_split = describe_split(root) if isinstance(root, Split) else "none"
    logger.info(
        "%s: %d splits, depth %d, %d leaves, root split %s",
        name, next(splits), tree.depth(), len(tree.leaves()), root_split,
    )
    return tree


def predict(tree: DecisionTree, record: PatientRecord) -> bool:
    return tree.predict(record)


def extract_rules(tree: DecisionTree) -> RuleSet:
    """One clause per admit leaf: the merged conditions on its root-to-leaf path."""
    clauses: List[Clause] = []

    def _walk(node: Node, path: List[Condition]) -> None:
        if isinstance(node, Leaf):
            if node.prediction:
                clauses.append(Clause.merged(path))
            return
        _walk(node.left, path + [node.left_condition()])
        _walk(node.right, path + [node.right_condition()])

    _walk(tree.root, [])
    return RuleSet(clauses=tuple(clauses), name=f"{tree.name} rules")


def describe_split(split: Split) -> str:
    if split.threshold is not None:
        return f"{split.feature} < {split.threshold:g}"
    cats = [format_category(v) for v in FEATURES[split.feature].domain if v in (split.categories or ())]
    return f"{split.feature} in {{{', '.join(cats)}}}"
