import math

import numpy as np
import pytest

from segmentkit.events import Event, OracleMismatchEvent, SegmentationFinishedEvent, event_manager
from segmentkit.grid import DiscreteSignal
from segmentkit.optimize import minimize_dp


@pytest.fixture
def received():
    events = []
    # drain events left over from earlier tests
    event_manager.flush()
    event_manager.subscribe(SegmentationFinishedEvent, events.append)
    yield events
    event_manager.unsubscribe(SegmentationFinishedEvent, events.append)


def test_minimization_publishes_a_finished_event(received):
    minimize_dp(DiscreteSignal.from_values([0.0, 0.0, 1.0, 1.0]), 0.1, 0.0)
    event_manager.flush()
    assert len(received) == 1
    event = received[0]
    assert (event.model, event.n, event.jumps) == ('potts', 4, 1)
    assert event.objective == pytest.approx(0.1)
    assert event.sender.__name__ == 'segmentkit.optimize.dp'


def test_event_json_conversion():
    event = OracleMismatchEvent({'samples': np.array([1.0, 2.0]), 'objective': math.inf, 'n': np.int64(3)})
    assert event.to_json()['instance'] == {'samples': [1.0, 2.0], 'objective': 'inf', 'n': 3}
    assert 'sender' in event.to_json()
    assert '_sync_event' not in event.to_json()


def test_failing_callbacks_do_not_stop_delivery(received):
    def broken(event):
        raise RuntimeError("callback failure")

    event_manager.subscribe(SegmentationFinishedEvent, broken)
    try:
        event_manager.publish(SegmentationFinishedEvent('bz', 8, 0, 1.0, 0.0), block=True)
    finally:
        event_manager.unsubscribe(SegmentationFinishedEvent, broken)
    assert len(received) == 1


def test_subscribing_to_unknown_types_fails():
    class Unregistered(Event):
        pass

    with pytest.raises(ValueError):
        event_manager.subscribe(Unregistered, print)
    with pytest.raises(ValueError):
        event_manager.publish(None)
