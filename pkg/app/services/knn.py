"""
k-nearest-neighbour admission classifier on (age, arrival_hour).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from app.core.errors import DataError, ParameterError
from app.models.schemas import KnnParams, PatientRecord

from .features import KNN_FEATURES, resolve


def _matrix(records: Sequence[PatientRecord]) -> np.ndarray:
    feats = resolve(KNN_FEATURES)
    return np.asarray([[f.value(r) for f in feats] for r in records], dtype=float)


@dataclass(frozen=True)
class KnnModel:
    """Training points already scaled; scaling statistics come from the training set only."""

    points: np.ndarray
    labels: np.ndarray
    center: np.ndarray
    scale: np.ndarray
    k: int

    @classmethod
    def fit(cls, train: Sequence[PatientRecord], params: Optional[KnnParams] = None) -> "KnnModel":
        params = params or KnnParams()
        if not train:
            raise DataError("kNN needs a nonempty training set")
        if params.k > len(train):
            raise ParameterError(f"k={params.k} exceeds the training set size {len(train)}")
        x = _matrix(train)
        if params.standardize:
            center = x.mean(axis=0)
            scale = x.std(axis=0)
            scale[scale == 0] = 1.0
        else:
            center = np.zeros(x.shape[1])
            scale = np.ones(x.shape[1])
        labels = np.asarray([r.admitted for r in train], dtype=bool)
        return cls(points=(x - center) / scale, labels=labels, center=center, scale=scale, k=params.k)

    def predict(self, record: PatientRecord) -> bool:
        q = (_matrix([record])[0] - self.center) / self.scale
        dist = np.sqrt(((self.points - q) ** 2).sum(axis=1))
        nearest = np.argsort(dist, kind="stable")[: self.k]  # distance ties: training order
        yes = int(self.labels[nearest].sum())
        return yes > self.k - yes  # vote ties: not admitted

    def predict_many(self, records: Sequence[PatientRecord]) -> List[bool]:
        return [self.predict(r) for r in records]


def knn_predict(train: Sequence[PatientRecord], query: PatientRecord, k: int = 1, standardize: bool = True) -> bool:
    return KnnModel.fit(train, KnnParams(k=k, standardize=standardize)).predict(query)
