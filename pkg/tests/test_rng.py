import numpy as np
import pytest

from app.core.errors import ParameterError
from app.core.rng import CONCERNS, STREAMS_PER_REPLICATION, RandomStream, StreamFamily


def test_same_seed_and_substream_replay_identically():
    a = RandomStream(2021, 3)
    b = RandomStream(2021, 3)
    assert [a.uniform01() for _ in range(50)] == [b.uniform01() for _ in range(50)]


def test_distinct_substreams_differ():
    a = RandomStream(2021, 0).uniforms(20)
    b = RandomStream(2021, 1).uniforms(20)
    assert not np.array_equal(a, b)


def test_uniforms_match_successive_scalar_draws_and_count():
    s = RandomStream(7, 0)
    batch = s.uniforms(100)
    scalar = s.replay()
    assert batch.tolist() == [scalar.uniform01() for _ in range(100)]
    assert s.counter == 100
    assert np.all((batch >= 0.0) & (batch < 1.0))


def test_replay_starts_from_the_beginning():
    s = RandomStream(11, 5)
    first = s.uniform01()
    s.uniform01()
    assert s.replay().uniform01() == first


def test_invalid_seed_and_substream_rejected():
    with pytest.raises(ParameterError):
        RandomStream(-1, 0)
    with pytest.raises(ParameterError):
        RandomStream(1, -2)


def test_stream_family_layout():
    fam = StreamFamily(2021, replication_index=2)
    assert fam.substream_id("arrivals") == 2 * STREAMS_PER_REPLICATION
    ids = {fam.substream_id(c) for c in CONCERNS}
    assert len(ids) == len(CONCERNS)
    assert fam.stream("beds") is fam.stream("beds")


def test_replications_do_not_share_streams():
    a = StreamFamily(2021, 0).stream("arrivals").uniforms(10)
    b = StreamFamily(2021, 1).stream("arrivals").uniforms(10)
    assert not np.array_equal(a, b)


def test_unknown_concern_rejected():
    with pytest.raises(ParameterError):
        StreamFamily(1).stream("weather")
