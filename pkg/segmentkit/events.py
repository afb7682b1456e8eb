from collections.abc import Callable
from types import ModuleType
import atexit
import inspect
import math
import queue
import threading
import traceback

import numpy as np

from segmentkit.logger import log


class Event:
    def __init__(self):
        self.sender: ModuleType | None = None
        # Used for blocking publish
        self._sync_event: threading.Event | None = None

    @staticmethod
    def _convert_to_json_value(value: object) -> object:
        if isinstance(value, (float, np.floating)):
            value = float(value)
            if math.isinf(value):
                return "inf" if value > 0 else "-inf"
            return value
        elif isinstance(value, np.integer):
            return int(value)
        elif isinstance(value, np.ndarray):
            return [Event._convert_to_json_value(v) for v in value.tolist()]
        elif isinstance(value, ModuleType):
            return value.__name__
        elif isinstance(value, dict):
            return {str(k): Event._convert_to_json_value(v) for k, v in value.items()}
        elif isinstance(value, (list, tuple)):
            return [Event._convert_to_json_value(v) for v in value]
        else:
            return value

    def to_json(self) -> dict:
        json_items = {}

        for key, value in self.__dict__.items():
            if key.startswith('_'):
                # Skip private attributes
                continue
            json_items[key] = self._convert_to_json_value(value)

        return json_items


class SegmentationFinishedEvent(Event):
    """ A global minimizer was computed. """

    def __init__(self, model: str, n: int | None, jumps: int, objective: float, runtime_seconds: float):
        super().__init__()
        self.model = model
        self.n = n
        self.jumps = jumps
        self.objective = objective
        self.runtime_seconds = runtime_seconds

    def __repr__(self):
        return f"SegmentationFinishedEvent(model={self.model}, n={self.n}, jumps={self.jumps}, objective={self.objective:.6g})"


class TrajectoryStepEvent(Event):
    """ One parameter point of a sweep has been minimized and compared with the limit. """

    def __init__(self, index: int, gamma: float, mu: float, t: float, distance: float, hausdorff: float):
        super().__init__()
        self.index = index
        self.gamma = gamma
        self.mu = mu
        self.t = t
        self.distance = distance
        self.hausdorff = hausdorff


class SweepFinishedEvent(Event):
    def __init__(self, name: str, passed: bool, final_distance: float):
        super().__init__()
        self.name = name
        self.passed = passed
        self.final_distance = final_distance


class OracleMismatchEvent(Event):
    """ Dynamic programming and enumeration disagreed on an instance. """

    def __init__(self, instance: dict):
        super().__init__()
        self.instance = instance


class _EventManager:
    def __init__(self):
        self._subscribers: dict[type[Event], list[Callable]] = {}
        for event_type in Event.__subclasses__():
            self._subscribers[event_type] = []

        self._event_queue: queue.Queue[Event | None] = queue.Queue()

        self._thread = threading.Thread(target=self.main, name="events", daemon=True)
        self._thread.start()

        log.debug("EventManager initialized")

    def subscribe(self, event_type: type[Event], callback: Callable):
        if event_type not in self._subscribers:
            raise ValueError(f"Unknown event type: {event_type}")

        self._subscribers[event_type].append(callback)

    def subscribe_all_events(self, callback: Callable[[Event], None]):
        for event_type in self._subscribers:
            self._subscribers[event_type].append(callback)

    def unsubscribe(self, event_type: type[Event], callback: Callable):
        if event_type in self._subscribers and callback in self._subscribers[event_type]:
            self._subscribers[event_type].remove(callback)

    def publish(self, event: Event, block: bool = False, timeout: float = 5.0):
        """ Publishes an event to all subscribers.

        event: The event instance to publish.
        block: If True, waits until the event has been handled by all subscribers.
        timeout: Maximum time to wait if blocking is enabled.
        """
        if event is None:
            raise ValueError("Cannot publish None event")

        caller = inspect.currentframe()
        event.sender = inspect.getmodule(caller.f_back) if caller is not None else None

        if block:
            # Prevent deadlock: ensure blocking publish is not invoked from the event handling thread
            if threading.current_thread() is self._thread:
                raise RuntimeError("publish(block=True) cannot be called from the event handling thread")
            event._sync_event = threading.Event()

        self._event_queue.put_nowait(event)

        if block and event._sync_event is not None:
            success = event._sync_event.wait(timeout=timeout)
            if not success:
                raise TimeoutError("Timeout waiting for event to be handled")

    def flush(self, timeout: float = 5.0) -> None:
        """ Wait until every queued event has been handled. """
        marker = Event()
        marker._sync_event = threading.Event()
        self._event_queue.put_nowait(marker)
        if not marker._sync_event.wait(timeout=timeout):
            raise TimeoutError("Timeout waiting for event queue to drain")

    def _handle_event(self, event: Event):
        for callback in list(self._subscribers.get(type(event), ())):
            try:
                callback(event)
            except Exception as e:
                log.error(f"Error in event callback: {e}")
                traceback.print_exc()
        # Signal the event is handled if blocking was requested
        if event._sync_event is not None:
            event._sync_event.set()

    def main(self):
        while True:
            event = self._event_queue.get()
            if event is None:
                break

            if type(event) is not Event:
                log.debug(f"{type(event).__name__}: {event.to_json()}")

            self._handle_event(event)
            self._event_queue.task_done()

        log.debug("EventManager main loop exiting")

    def stop(self):
        self._event_queue.put(None)
        self._thread.join(timeout=2.0)


event_manager = _EventManager()
atexit.register(event_manager.stop)
