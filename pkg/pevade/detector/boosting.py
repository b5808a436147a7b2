# -*- coding: utf-8 -*-
"""
Module for the boosted tree ensemble over hand-crafted features
"""
import logging
from dataclasses import dataclass
from typing import (
    Sequence,
    Tuple
)

import numpy as np
from sklearn.tree import DecisionTreeRegressor

from .detector import (
    DEFAULT_THRESHOLD,
    Detector
)
from .exceptions import DegenerateDataset
from .features import extract_features
from ..constants import (
    MAX_DEPTH,
    MAX_TREES
)

logger = logging.getLogger(__name__)

LEAF = -1
_MIN_HESSIAN = 1e-12


def sigmoid(values: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-values))


@dataclass(frozen=True)
class Tree:
    """
    Regression tree flattened into arrays, node 0 is the root.

    Samples go left when feature <= threshold, leaves have feature LEAF.
    """
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @classmethod
    def from_regressor(cls, regressor: DecisionTreeRegressor, leaf_values: np.ndarray) -> "Tree":
        tree = regressor.tree_
        is_leaf = tree.children_left == LEAF
        return cls(feature=np.where(is_leaf, LEAF, tree.feature).astype(np.int32),
                   threshold=tree.threshold.astype(np.float64),
                   left=tree.children_left.astype(np.int32),
                   right=tree.children_right.astype(np.int32),
                   value=np.where(is_leaf, leaf_values, 0.0).astype(np.float64))

    @property
    def depth(self) -> int:
        depths = np.zeros(len(self.feature), dtype=np.int64)
        for node in range(len(self.feature)):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def apply(self, features: np.ndarray) -> np.ndarray:
        """
        :param np.ndarray features: Samples, (samples, features)
        :return: Leaf reached by every sample
        :rtype: np.ndarray
        """
        # compared in single precision like the regressor that built the tree
        features = np.asarray(features, dtype=np.float32)
        nodes = np.zeros(len(features), dtype=np.int64)
        active = self.feature[nodes] != LEAF
        while active.any():
            current = nodes[active]
            goes_left = features[active, self.feature[current]] <= self.threshold[current]
            nodes[active] = np.where(goes_left, self.left[current], self.right[current])
            active = self.feature[nodes] != LEAF
        return nodes

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.value[self.apply(features)]


class FeatureModel(Detector):
    """
    Gradient boosted regression trees on the logistic loss.

    The raw score starts at 0, so an empty ensemble scores 0.5. There is no
    gradient with respect to the input.
    """
    name = "feature"

    def __init__(self, trees: Sequence[Tree] = (), learning_rate: float = 0.3, base_score: float = 0.0,
                 threshold: float = DEFAULT_THRESHOLD):
        super().__init__(threshold)
        self.trees: Tuple[Tree, ...] = tuple(trees)
        self.learning_rate = learning_rate
        self.base_score = base_score
        self.training_accuracy = None

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        """
        :param np.ndarray features: Samples, (samples, features)
        :return: Raw scores before the logistic function
        :rtype: np.ndarray
        """
        raw = np.full(len(features), self.base_score, dtype=np.float64)
        for tree in self.trees:
            raw += self.learning_rate * tree.predict(features)
        return raw

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return sigmoid(self.decision_function(features))

    def malice(self, data: bytes) -> float:
        return float(self.predict_proba(extract_features(data)[np.newaxis, :])[0])


def train_feature_model(dataset: Sequence[Tuple[bytes, int]], n_trees: int = 50, depth: int = 3,
                        learning_rate: float = 0.3, seed: int = 0, subsample: float = 1.0) -> FeatureModel:
    """
    Train the ensemble by gradient boosting on the logistic loss.

    Every tree is fit on the residuals with an exact split search, its leaves
    then get the Newton step sum(residual) / sum(p * (1 - p)).

    :param dataset: File contents with their label, 1 for malicious
    :param int n_trees: Number of trees
    :param int depth: Largest depth of a tree
    :param float learning_rate: Shrinkage applied to every tree
    :param int seed: Seed of the row subsampling and the split tie breaking
    :param float subsample: Share of the rows every tree is fit on
    :return: Trained model, training_accuracy holds the accuracy on the dataset
    :rtype: FeatureModel
    :raise DegenerateDataset: Both labels are not present
    :raise ValueError: The ensemble is larger than MAX_TREES trees of depth MAX_DEPTH
    """
    labels = np.array([label for _, label in dataset], dtype=np.float64)
    if len(set(labels.tolist())) != 2:
        raise DegenerateDataset("Training needs both benign and malicious files")

    features = np.stack([extract_features(data) for data, _ in dataset])
    return fit_boosting(features, labels, n_trees, depth, learning_rate, seed, subsample)


def fit_boosting(features: np.ndarray, labels: np.ndarray, n_trees: int = 50, depth: int = 3,
                 learning_rate: float = 0.3, seed: int = 0, subsample: float = 1.0) -> FeatureModel:
    """
    Gradient boosting on a feature matrix, see train_feature_model

    :param np.ndarray features: Samples, (samples, features)
    :param np.ndarray labels: 0 or 1 for every sample
    :return: Trained model
    :rtype: FeatureModel
    :raise ValueError: The ensemble is larger than MAX_TREES trees of depth MAX_DEPTH
    """
    if not 0 <= n_trees <= MAX_TREES:
        raise ValueError(f"n_trees must be between 0 and {MAX_TREES}, got {n_trees}")
    if not 1 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be between 1 and {MAX_DEPTH}, got {depth}")
    rng = np.random.default_rng(seed)
    raw = np.zeros(len(labels), dtype=np.float64)
    trees = []
    rows = max(1, int(round(subsample * len(labels))))
    for index in range(n_trees):
        probabilities = sigmoid(raw)
        residuals = labels - probabilities
        sample = np.sort(rng.choice(len(labels), size=rows, replace=False)) if rows < len(labels) else \
            np.arange(len(labels))

        regressor = DecisionTreeRegressor(max_depth=depth, random_state=seed + index)
        regressor.fit(features[sample], residuals[sample])
        leaves = regressor.apply(features[sample])
        hessian = probabilities[sample] * (1.0 - probabilities[sample])
        leaf_values = np.zeros(regressor.tree_.node_count, dtype=np.float64)
        numerator = np.bincount(leaves, weights=residuals[sample], minlength=len(leaf_values))
        denominator = np.bincount(leaves, weights=hessian, minlength=len(leaf_values))
        np.divide(numerator, np.maximum(denominator, _MIN_HESSIAN), out=leaf_values)

        tree = Tree.from_regressor(regressor, leaf_values)
        trees.append(tree)
        raw += learning_rate * tree.predict(features)

    model = FeatureModel(trees, learning_rate)
    model.training_accuracy = float(np.mean((sigmoid(raw) >= model.threshold) == (labels == 1)))
    logger.info("Trained %d trees of depth %d, training accuracy %.4f", n_trees, depth, model.training_accuracy)

    return model
