import pytest

from app.core.errors import DataError, ParameterError
from app.models.schemas import KnnParams
from app.services.knn import KnnModel, knn_predict
from conftest import make_record


def test_nearest_in_standardized_space():
    train = [
        make_record(age=20, hour=10.0, admitted=False),
        make_record(age=80, hour=20.0, admitted=True),
    ]
    assert knn_predict(train, make_record(age=75, hour=19.0)) is True
    assert knn_predict(train, make_record(age=25, hour=11.0)) is False


def test_query_on_a_training_point_returns_its_label():
    train = [
        make_record(age=5, hour=3.0, admitted=True),
        make_record(age=40, hour=12.0, admitted=False),
        make_record(age=41, hour=12.5, admitted=True),
    ]
    for record in train:
        assert knn_predict(train, record) is record.admitted


def test_k_equal_to_training_size_votes_the_majority():
    train = [
        make_record(age=10, hour=1.0, admitted=True),
        make_record(age=50, hour=12.0, admitted=True),
        make_record(age=90, hour=23.0, admitted=False),
    ]
    model = KnnModel.fit(train, KnnParams(k=3))
    assert model.predict_many([make_record(age=90, hour=23.0), make_record(age=1, hour=0.5)]) == [True, True]


def test_vote_tie_is_not_admitted():
    train = [make_record(age=10, admitted=True), make_record(age=90, admitted=False)]
    assert knn_predict(train, make_record(age=10), k=2) is False


def test_scaling_matters():
    # age spans more raw units than hour, so unscaled distance leans on age
    train = [
        make_record(age=40, hour=2.0, admitted=False),
        make_record(age=60, hour=14.0, admitted=True),
    ]
    query = make_record(age=58, hour=0.0)
    assert knn_predict(train, query, standardize=False) is True
    assert knn_predict(train, query, standardize=True) is False


def test_constant_feature_does_not_divide_by_zero():
    train = [make_record(age=30, hour=h, admitted=h > 12) for h in (1.0, 5.0, 20.0)]
    assert knn_predict(train, make_record(age=70, hour=19.0)) is True


def test_fit_errors():
    with pytest.raises(DataError):
        KnnModel.fit([])
    with pytest.raises(ParameterError):
        KnnModel.fit([make_record()], KnnParams(k=2))
