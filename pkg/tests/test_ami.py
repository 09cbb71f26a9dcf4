"""Message channel: latency, drops, ordering, conservation, determinism."""

import pytest
from hypothesis import given, settings, strategies as st

from gridshaver.ami import Channel, ChannelConfig, GenReport, Shed


def msg(n: int) -> GenReport:
    return GenReport(site_id=f"site-{n}", kw=float(n), timestamp=float(n))


def test_ideal_channel_delivers_same_step():
    ch = Channel()
    ch.publish(msg(1), t_now=0)
    assert ch.poll_due(0) == [msg(1)]


def test_full_drop_delivers_nothing():
    ch = Channel(config=ChannelConfig(drop_probability=1.0, seed=1))
    for k in range(20):
        ch.publish(msg(k), t_now=k)
    assert ch.poll_due(100) == []
    assert ch.dropped == ch.published == 20


def test_latency_delays_by_exactly_n_steps():
    ch = Channel(config=ChannelConfig(latency_steps=3))
    ch.publish(msg(1), t_now=5)
    assert ch.poll_due(7) == []
    assert ch.poll_due(8) == [msg(1)]


def test_empty_poll():
    assert Channel().poll_due(10) == []


def test_same_step_fifo_order():
    ch = Channel()
    ch.publish(msg(1), t_now=0)
    ch.publish(msg(2), t_now=0)
    assert ch.poll_due(0) == [msg(1), msg(2)]


def test_due_time_order_beats_publish_order():
    # Published earlier but due later (latency 2) must follow the later
    # publication that is due sooner (latency 0).
    ch = Channel()
    ch.publish(msg(1), t_now=1, latency=2)  # due at 3
    ch.publish(msg(2), t_now=2, latency=0)  # due at 2
    assert ch.poll_due(3) == [msg(2), msg(1)]


def test_conservation_counts():
    ch = Channel(config=ChannelConfig(latency_steps=1, drop_probability=0.3, seed=9))
    for k in range(200):
        ch.publish(msg(k), t_now=k)
        ch.poll_due(k)
    assert ch.published == ch.delivered + ch.dropped + ch.pending


def test_identical_seed_identical_delivery():
    def run(seed: int) -> list:
        ch = Channel(config=ChannelConfig(drop_probability=0.4, seed=seed))
        out = []
        for k in range(100):
            ch.publish(Shed(load_id=f"l{k}", timestamp=float(k)), t_now=k)
            out.extend(ch.poll_due(k))
        return out

    assert run(7) == run(7)
    assert run(7) != run(8)  # the drop pattern actually depends on the seed


def test_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(drop_probability=1.5)
    with pytest.raises(ValueError):
        ChannelConfig(latency_steps=-1)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(0, 30), max_size=40),
    st.integers(0, 4),
    st.floats(0.0, 1.0),
)
def test_conservation_property(publish_steps, latency, drop_p):
    ch = Channel(config=ChannelConfig(latency_steps=latency, drop_probability=drop_p, seed=3))
    t = 0
    for t in sorted(publish_steps):
        ch.publish(msg(t), t_now=t)
    delivered = len(ch.poll_due(t))
    assert ch.published == delivered + ch.dropped + ch.pending
