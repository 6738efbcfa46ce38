import math
from typing import Dict, Optional

import numpy as np

from .core_types import ActionId, ContractViolation, StateRef, require_non_terminal


class ActionValues:
    """
    # Base class for action-value estimates Q(s, a)
    # Every learning update mutates one of these; single writer per run
    """
    num_actions: int

    def value(self, state: StateRef, action: ActionId) -> float:
        raise NotImplementedError

    def values(self, state: StateRef) -> np.ndarray:
        """
        # Action values of every action in a state, as a fresh array
        """
        return np.array([self.value(state, a) for a in range(self.num_actions)], dtype=float)

    def apply_delta(self, state: StateRef, action: ActionId, step: float) -> None:
        raise NotImplementedError

    def _check_action(self, action: ActionId) -> None:
        if not (0 <= action < self.num_actions):
            raise ContractViolation(f"행동 인덱스 범위 초과: {action} (행동 수: {self.num_actions})")

    @staticmethod
    def _check_step(step: float) -> None:
        if not math.isfinite(step):
            raise ContractViolation(f"갱신 크기가 유한하지 않습니다: {step}")


class TabularActionValues(ActionValues):
    """
    # |S| x |A| table of action values, zero-initialized
    """
    def __init__(self, num_states: int, num_actions: int, table: Optional[np.ndarray] = None):
        self.num_states = num_states
        self.num_actions = num_actions
        if table is None:
            self.table = np.zeros((num_states, num_actions), dtype=float)
        else:
            self.table = np.array(table, dtype=float)
            if self.table.shape != (num_states, num_actions):
                raise ContractViolation(f"Q 테이블 크기 불일치: {self.table.shape}")

    @classmethod
    def from_table(cls, table: np.ndarray) -> 'TabularActionValues':
        table = np.asarray(table, dtype=float)
        return cls(table.shape[0], table.shape[1], table)

    def _row(self, state: StateRef) -> int:
        require_non_terminal(state, "Q 값 조회")
        if state.index is None or not (0 <= state.index < self.num_states):
            raise ContractViolation(f"상태 인덱스 범위 초과: {state.index} (상태 수: {self.num_states})")
        return state.index

    def value(self, state: StateRef, action: ActionId) -> float:
        row = self._row(state)
        self._check_action(action)
        return float(self.table[row, action])

    def values(self, state: StateRef) -> np.ndarray:
        return self.table[self._row(state)].copy()

    def apply_delta(self, state: StateRef, action: ActionId, step: float) -> None:
        row = self._row(state)
        self._check_action(action)
        self._check_step(step)
        self.table[row, action] += step


class LinearActionValues(ActionValues):
    """
    # Linear action values over binary features (tile coding)
    # value(s, a) is the sum of the weights at the featurizer's active indices;
    # an update of size `step` is spread evenly over the num_tilings active weights
    # The featurizer lays action blocks out `action_stride` apart, so the active indices
    # of (s, a) are state_features(s) + a * action_stride
    """
    CACHE_SIZE = 64

    def __init__(self, featurizer, num_actions: int):
        self.featurizer = featurizer
        self.num_actions = num_actions
        self.num_tilings = featurizer.num_tilings
        self.weights = np.zeros(featurizer.num_features, dtype=float)
        self._action_offsets = np.arange(num_actions) * featurizer.action_stride
        self._cache: Dict[StateRef, np.ndarray] = {}

    def _state_features(self, state: StateRef) -> np.ndarray:
        require_non_terminal(state, "Q 값 조회")
        features = self._cache.get(state)
        if features is None:
            if len(self._cache) >= self.CACHE_SIZE:
                self._cache.clear()
            features = self.featurizer.state_features(state)
            self._cache[state] = features
        return features

    def _features(self, state: StateRef, action: ActionId) -> np.ndarray:
        self._check_action(action)
        return self._state_features(state) + self._action_offsets[action]

    def value(self, state: StateRef, action: ActionId) -> float:
        return float(self.weights[self._features(state, action)].sum())

    def values(self, state: StateRef) -> np.ndarray:
        indices = self._state_features(state)[None, :] + self._action_offsets[:, None]
        return self.weights[indices].sum(axis=1)

    def apply_delta(self, state: StateRef, action: ActionId, step: float) -> None:
        self._check_step(step)
        features = self._features(state, action)
        self.weights[features] += step / self.num_tilings
