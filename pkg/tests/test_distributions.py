import math

import numpy as np
import pytest

from app.core.distributions import (
    Bernoulli,
    Categorical,
    Exponential,
    Triangular,
    TruncatedNormal,
    Uniform,
    sample,
    sample_many,
)
from app.core.errors import ParameterError
from app.core.rng import RandomStream


@pytest.mark.parametrize(
    "build",
    [
        lambda: Exponential(0.0),
        lambda: Uniform(5.0, 3.0),
        lambda: Triangular(5.0, 3.0, 4.0),
        lambda: Bernoulli(1.5),
        lambda: Categorical(("a", "b"), (0.0, 0.0)),
        lambda: Categorical(("a",), (-1.0,)),
        lambda: TruncatedNormal(0.0, 0.0, 0.0, 1.0),
    ],
)
def test_invalid_parameters_fail_at_construction(build):
    with pytest.raises(ParameterError):
        build()


def test_inverse_transform_values():
    assert Uniform(3.0, 10.0).from_uniform(0.5) == 6.5
    assert Triangular(5.0, 10.0, 15.0).from_uniform(0.5) == pytest.approx(10.0)
    assert Triangular(5.0, 10.0, 15.0).from_uniform(0.0) == 5.0
    assert Exponential(24.0).from_uniform(1.0 - math.exp(-1.0)) == pytest.approx(24.0)
    assert Bernoulli(0.3).from_uniform(0.29) is True
    assert Bernoulli(0.3).from_uniform(0.3) is False


def test_degenerate_triangular_returns_its_point():
    assert Triangular(4.0, 4.0, 4.0).from_uniform(0.7) == 4.0


def test_categorical_normalises_and_skips_zero_weights():
    c = Categorical(("a", "b", "c"), (0.0, 2.0, 0.0))
    assert c.weights == (0.0, 1.0, 0.0)
    assert {c.from_uniform(u) for u in (0.0, 0.4, 0.999)} == {"b"}
    assert Categorical.from_mapping({"x": 1, "y": 3}).weights == pytest.approx((0.25, 0.75))


def test_sample_many_matches_scalar_sampling():
    spec = Triangular(15.0, 45.0, 90.0)
    stream = RandomStream(3, 0)
    many = sample_many(spec, stream, 200)
    again = stream.replay()
    assert np.allclose(many, [sample(spec, again) for _ in range(200)], rtol=0, atol=1e-12)


@pytest.mark.parametrize(
    "spec, mean, tol",
    [
        (Exponential(24.0), 24.0, 0.2),
        (Uniform(3.0, 10.0), 6.5, 0.05),
        (Triangular(5.0, 10.0, 15.0), 10.0, 0.05),
        (Triangular(15.0, 45.0, 90.0), 50.0, 0.5),
        (Uniform(10.0, 45.0), 27.5, 0.2),
        (Uniform(20.0, 60.0), 40.0, 0.2),
        (Uniform(30.0, 90.0), 60.0, 0.3),
        (Uniform(10.0, 60.0), 35.0, 0.2),
    ],
)
def test_sample_means_match_analytic_means(spec, mean, tol):
    draws = sample_many(spec, RandomStream(2021, 0), 1_000_000)
    assert spec.expected() == pytest.approx(mean)
    assert abs(draws.mean() - mean) <= tol


def test_moment_matched_truncated_normal_keeps_mean_and_sd():
    dist = TruncatedNormal.moment_matched(31.7, 24.4, 0.0, 105.0)
    assert dist.expected() == pytest.approx(31.7, abs=0.01)
    assert dist.std() == pytest.approx(24.4, abs=0.01)
    draws = sample_many(dist, RandomStream(5, 0), 200_000)
    assert draws.min() >= 0.0 and draws.max() <= 105.0


def test_plain_truncation_shifts_the_mean_up():
    assert TruncatedNormal(31.7, 24.4, 0.0, 105.0).expected() > 33.0


def test_describe_names_family_and_parameters():
    assert Exponential(24.0).describe() == "Exponential(24)"
    assert Triangular(15.0, 45.0, 90.0).describe() == "Triangular(15,45,90)"
    assert Bernoulli(0.5).describe() == "Bernoulli(0.5)"
    assert Categorical(("a", "b"), (1.0, 3.0)).describe() == "Categorical(a:0.250, b:0.750)"
    assert TruncatedNormal(30.0, 25.0, 0.0, 105.0).describe() == "TruncatedNormal(30,25,[0,105])"
