import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass
class RunStatistics:
    """
    # Per-episode measurements of every run (runs x episodes) and derived aggregates
    # window: width of the right-centred moving average
    """
    values: np.ndarray
    window: int = 30

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.window < 1:
            raise ValueError(f"이동 평균 창 크기는 1 이상이어야 합니다: {self.window}")

    @property
    def runs(self) -> int:
        return self.values.shape[0]

    @property
    def episodes(self) -> int:
        return self.values.shape[1]

    @staticmethod
    def _stderr(samples: np.ndarray) -> np.ndarray:
        # samples: runs along axis 0
        if samples.shape[0] < 2:
            return np.zeros(samples.shape[1:])
        return samples.std(axis=0, ddof=1) / math.sqrt(samples.shape[0])

    @property
    def mean(self) -> np.ndarray:
        return self.values.mean(axis=0)

    @property
    def stderr(self) -> np.ndarray:
        return self._stderr(self.values)

    @property
    def moving_average(self) -> np.ndarray:
        """
        # Average of the mean curve over episodes max(0, e - w + 1) .. e
        """
        mean = self.mean
        return np.array([mean[max(0, e - self.window + 1):e + 1].mean() for e in range(self.episodes)])

    def window_average(self, first: int, last: int) -> Tuple[float, float]:
        """
        # Mean and standard error over runs of each run's average across episodes first..last (1-indexed)
        """
        if not (1 <= first <= last <= self.episodes):
            raise ValueError(f"잘못된 에피소드 구간: {first}..{last} (에피소드 수: {self.episodes})")
        per_run = self.values[:, first - 1:last].mean(axis=1)
        return float(per_run.mean()), float(self._stderr(per_run[:, None])[0])

    def cumulative_average(self, episode: int) -> Tuple[float, float]:
        """
        # Average return per episode after `episode` episodes, with its standard error
        """
        return self.window_average(1, episode)

    def confidence_interval(self, episode: int, z: float = 1.96) -> Tuple[float, float]:
        mean, se = self.cumulative_average(episode)
        return mean - z * se, mean + z * se

    @property
    def overall_mean(self) -> Tuple[float, float]:
        return self.window_average(1, self.episodes)
