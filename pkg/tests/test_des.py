import math

import pytest

from app.core.des import (
    CRITICAL,
    STANDARD,
    TRACE_HEADER,
    EventCalendar,
    RequestOutcome,
    Resource,
    Simulation,
    TallyStat,
    TimeWeightedStat,
)
from app.core.distributions import Exponential
from app.core.errors import ParameterError, ResourceError, SchedulingError
from app.core.rng import RandomStream


def test_calendar_pops_in_time_then_insertion_order():
    cal = EventCalendar()
    cal.schedule(5.0, "b")
    cal.schedule(1.0, "a")
    cal.schedule(5.0, "c")
    kinds = [cal.pop_next().kind for _ in range(3)]
    assert kinds == ["a", "b", "c"]
    assert cal.clock == 5.0
    assert cal.pop_next() is None


def test_event_at_current_clock_is_accepted():
    cal = EventCalendar()
    cal.schedule(3.0, "a")
    cal.pop_next()
    cal.schedule(4.0, "later")
    cal.schedule(3.0, "now")
    assert cal.pop_next().kind == "now"


def test_calendar_matches_sort_oracle():
    stream = RandomStream(99, 0)
    cal = EventCalendar()
    times = [round(stream.uniform01() * 100.0, 1) for _ in range(1000)]  # rounding forces ties
    scheduled = [cal.schedule(t, "e", i) for i, t in enumerate(times)]
    popped = [cal.pop_next() for _ in range(len(times))]
    assert popped == sorted(scheduled, key=lambda e: (e.time, e.seq))


def test_scheduling_in_the_past_is_rejected():
    cal = EventCalendar()
    cal.schedule(10.0, "x")
    cal.pop_next()
    with pytest.raises(SchedulingError):
        cal.schedule(9.0, "y")
    with pytest.raises(SchedulingError):
        cal.schedule(math.inf, "z")


def test_resource_grants_queues_and_hands_over():
    res = Resource("doctor", 1)
    assert res.request(1, STANDARD, 0.0) is RequestOutcome.GRANTED
    assert res.request(2, STANDARD, 1.0) is RequestOutcome.ENQUEUED
    assert res.request(3, CRITICAL, 2.0) is RequestOutcome.ENQUEUED
    assert res.waiting == 2
    assert res.release(1, 4.0) == 3  # higher priority first
    assert res.release(3, 6.0) == 2
    assert res.release(2, 8.0) is None
    assert res.grants == 3 and res.releases == 3
    assert res.wait.mean == pytest.approx((0.0 + 2.0 + 5.0) / 3)


def test_fifo_within_priority_class():
    res = Resource("nurse", 1)
    res.request(0, STANDARD, 0.0)
    for i in (1, 2, 3):
        res.request(i, STANDARD, float(i))
    order = []
    holder = 0
    for t in (10.0, 11.0, 12.0):
        holder = res.release(holder, t)
        order.append(holder)
    assert order == [1, 2, 3]


def test_release_without_holding_raises():
    res = Resource("clerk", 2)
    with pytest.raises(ResourceError):
        res.release(7, 0.0)


def test_negative_capacity_rejected():
    with pytest.raises(ParameterError):
        Resource("x", -1)


def test_tally_and_time_weighted_respect_warmup():
    tally = TallyStat(warmup=10.0)
    tally.add(100.0, at_time=5.0)
    tally.add(2.0, at_time=10.0)
    tally.add(4.0, at_time=20.0)
    assert tally.count == 2 and tally.mean == 3.0 and tally.variance == 2.0

    level = TimeWeightedStat(warmup=10.0)
    level.update(0.0, 5.0)   # level 5 on [0, 20), only [10, 20) counts
    level.update(20.0, 1.0)  # level 1 on [20, 30)
    assert level.mean(30.0) == pytest.approx((5.0 * 10 + 1.0 * 10) / 20.0)


def test_simulation_dispatches_and_traces():
    sim = Simulation(trace=True)
    seen = []
    sim.on("ping", lambda ev: seen.append((sim.now, ev.entity_id)))
    sim.schedule(2.0, "ping", 1)
    sim.schedule(1.0, "ping", 2)
    assert sim.run() == 2
    assert seen == [(1.0, 2), (2.0, 1)]
    assert sim.trace_csv().splitlines()[0] == TRACE_HEADER
    assert sim.trace_lines()[0] == "1.0,1,ping,2"


def test_run_stops_at_until_and_unknown_kind_fails():
    sim = Simulation()
    sim.on("a", lambda ev: None)
    sim.schedule(1.0, "a")
    sim.schedule(5.0, "a")
    assert sim.run(until=2.0) == 1
    assert len(sim.calendar) == 1
    sim.schedule(0.5, "nobody")
    with pytest.raises(SchedulingError):
        sim.run()


def _queue(servers: int, mean_interarrival: float, mean_service: float, customers: int, seed: int):
    sim = Simulation()
    res = sim.add_resource("server", servers)
    arrivals, services = RandomStream(seed, 0), RandomStream(seed, 1)
    iat, svc = Exponential(mean_interarrival), Exponential(mean_service)
    arrived_at = {}
    sojourn = TallyStat()
    in_system = TimeWeightedStat()
    state = {"arrived": 0, "present": 0}

    def start(cid):
        sim.schedule(svc.from_uniform(services.uniform01()), "depart", cid)

    def on_arrive(ev):
        cid = state["arrived"]
        state["arrived"] += 1
        arrived_at[cid] = sim.now
        state["present"] += 1
        in_system.update(sim.now, state["present"])
        if state["arrived"] < customers:
            sim.schedule(iat.from_uniform(arrivals.uniform01()), "arrive")
        if res.request(cid, STANDARD, sim.now) is RequestOutcome.GRANTED:
            start(cid)

    def on_depart(ev):
        sojourn.add(sim.now - arrived_at.pop(ev.entity_id))
        state["present"] -= 1
        in_system.update(sim.now, state["present"])
        nxt = res.release(ev.entity_id, sim.now)
        if nxt is not None:
            start(nxt)

    sim.on("arrive", on_arrive)
    sim.on("depart", on_depart)
    sim.schedule(iat.from_uniform(arrivals.uniform01()), "arrive")
    sim.run()
    return sim, res, sojourn, in_system


def test_mm1_utilization():
    sim, res, _, _ = _queue(1, 20.0, 10.0, 100_000, seed=1)
    assert res.utilization(sim.now) == pytest.approx(0.5, abs=0.02)


def test_mm2_littles_law():
    sim, _, sojourn, in_system = _queue(2, 10.0, 15.0, 100_000, seed=2)
    arrival_rate = sojourn.count / sim.now
    L = in_system.mean(sim.now)
    assert abs(L - arrival_rate * sojourn.mean) / L < 0.05
