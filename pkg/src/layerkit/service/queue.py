"""FIFO generation queue: a bounded worker pool (default one worker)
drains requests in submission order."""

from __future__ import annotations

import queue
import threading
from concurrent.futures import Future


class GenerationQueue:
    def __init__(self, workers: int = 1):
        self._queue: "queue.Queue[tuple[Future, callable] | None]" = queue.Queue()
        self._threads = [
            threading.Thread(target=self._run, name=f"generate-{i}", daemon=True)
            for i in range(max(1, workers))
        ]
        for thread in self._threads:
            thread.start()

    def _run(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            future, fn = item
            if not future.set_running_or_notify_cancel():
                continue
            try:
                future.set_result(fn())
            except BaseException as err:  # delivered to the waiting request
                future.set_exception(err)

    def submit(self, fn) -> Future:
        future: Future = Future()
        self._queue.put((future, fn))
        return future

    def shutdown(self) -> None:
        for _ in self._threads:
            self._queue.put(None)
