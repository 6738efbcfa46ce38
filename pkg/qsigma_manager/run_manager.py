import logging
import threading
from concurrent.futures import Future, ProcessPoolExecutor, wait
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import psutil

logger = logging.getLogger(__name__)


def default_worker_count() -> int:
    return psutil.cpu_count(logical=True) or 1


class RunManager:
    """
    # Manage the worker pool that executes independent seeded runs
    # Results are collected by run index, so completion order never matters
    """
    def __init__(self, workers: Optional[int] = None):
        """
        # Initialize run manager
        # workers: maximum number of worker processes (default: logical CPU count)
        """
        if workers is None:
            workers = default_worker_count()
        if workers < 1:
            logger.warning(f"워커 수가 1보다 작아 1로 조정합니다: {workers}")
            workers = 1
        self.workers = workers
        self.results: Dict[int, np.ndarray] = {}
        self.lock = threading.Lock()
        self.completed = 0
        logger.info(f"실행 매니저 초기화 완료 (워커 {self.workers}개)")

    def _store(self, run_index: int, values: np.ndarray, runs: int) -> None:
        with self.lock:
            self.results[run_index] = values
            self.completed += 1
            done = self.completed
        logger.debug(f"실행 {run_index} 완료 ({done}/{runs})")

    def _on_done(self, run_index: int, runs: int) -> Callable[[Future], None]:
        # Runs on the executor's management thread
        def callback(future: Future) -> None:
            if future.cancelled() or future.exception() is not None:
                return
            self._store(run_index, future.result(), runs)
        return callback

    def execute(self, run_fn: Callable[[Any, int], np.ndarray], config: Any, runs: int) -> List[np.ndarray]:
        """
        # Execute run_fn(config, i) for i in 0 .. runs-1
        # run_fn: picklable module-level function returning the per-episode measurements of one run
        # Returns: results ordered by run index
        """
        with self.lock:
            self.results = {}
            self.completed = 0
        workers = min(self.workers, runs)
        if workers <= 1:
            for run_index in range(runs):
                self._store(run_index, run_fn(config, run_index), runs)
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                futures = []
                for run_index in range(runs):
                    future = executor.submit(run_fn, config, run_index)
                    future.add_done_callback(self._on_done(run_index, runs))
                    futures.append(future)
                wait(futures)
            for run_index, future in enumerate(futures):
                error = future.exception()
                if error is not None:
                    logger.error(f"실행 {run_index} 중 오류 발생: {error}")
                    raise error
        with self.lock:
            return [self.results[i] for i in range(runs)]
