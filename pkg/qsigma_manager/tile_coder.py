from typing import Sequence, Tuple

import numpy as np

from .core_types import ActionId, ContractViolation, StateRef

# Offset multipliers per dimension: consecutive odd numbers
ODD_OFFSETS = (1, 3)


class TileCoder:
    """
    # Tile coding for a 2-D continuous state space with per-action feature blocks
    # Each dimension is normalized to [0, tiles_per_dim) tile units; tiling i is displaced
    # by (odd_d * i mod num_tilings) / num_tilings tile units along dimension d, so every
    # tiling covers (tiles_per_dim + 1)^2 tiles. Indexing is direct arithmetic
    # (action block, tiling, grid cell) and therefore collision-free.
    """
    def __init__(self, ranges: Sequence[Tuple[float, float]], num_actions: int,
                 num_tilings: int = 8, tiles_per_dim: int = 8, capacity: int = 4096):
        if len(ranges) != len(ODD_OFFSETS):
            raise ContractViolation(f"타일 코더는 {len(ODD_OFFSETS)}차원 상태만 지원합니다: {len(ranges)}")
        self.low = np.array([r[0] for r in ranges], dtype=float)
        self.high = np.array([r[1] for r in ranges], dtype=float)
        self.num_actions = num_actions
        self.num_tilings = num_tilings
        self.tiles_per_dim = tiles_per_dim
        self.grid = tiles_per_dim + 1
        self.tiles_per_tiling = self.grid ** len(ranges)
        if num_tilings * self.tiles_per_tiling > capacity:
            raise ContractViolation(
                f"타일 수({num_tilings * self.tiles_per_tiling})가 용량({capacity})을 초과합니다.")
        self.capacity = capacity
        self.num_features = capacity * num_actions
        tilings = np.arange(num_tilings)
        # (num_tilings, dims) displacement in tile units, each in [0, 1)
        self.offsets = np.stack(
            [(odd * tilings % num_tilings) / num_tilings for odd in ODD_OFFSETS], axis=1)
        self._tiling_base = tilings * self.tiles_per_tiling

    def active_tiles(self, coords: Sequence[float], action: ActionId) -> np.ndarray:
        """
        # Indices of the num_tilings active tiles for (coords, action)
        # Coordinates outside the declared ranges are clamped onto the bounds
        """
        if not (0 <= action < self.num_actions):
            raise ContractViolation(f"행동 인덱스 범위 초과: {action}")
        return action * self.capacity + self.base_tiles(coords)

    def base_tiles(self, coords: Sequence[float]) -> np.ndarray:
        """
        # Active tiles of action 0; other actions are shifted by action * capacity
        """
        x = np.clip(np.asarray(coords, dtype=float), self.low, self.high)
        scaled = (x - self.low) / (self.high - self.low) * self.tiles_per_dim
        cells = np.floor(scaled + self.offsets).astype(int)
        return self._tiling_base + cells[:, 0] * self.grid + cells[:, 1]

    @property
    def action_stride(self) -> int:
        return self.capacity

    def state_features(self, state: StateRef) -> np.ndarray:
        return self.base_tiles(state.coords)


class OneHotFeaturizer:
    """
    # One feature per tabular (state, action) pair; a single "tiling"
    """
    num_tilings = 1

    def __init__(self, num_states: int, num_actions: int):
        self.num_states = num_states
        self.num_actions = num_actions
        self.num_features = num_states * num_actions

    @property
    def action_stride(self) -> int:
        return 1

    def state_features(self, state: StateRef) -> np.ndarray:
        if state.index is None or not (0 <= state.index < self.num_states):
            raise ContractViolation(f"상태 인덱스 범위 초과: {state.index}")
        return np.array([state.index * self.num_actions])
