import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

# Action identifiers are plain non-negative integers
ActionId = int


class ContractViolation(ValueError):
    """
    # Raised when a caller breaks an operation's precondition
    """


@dataclass(frozen=True)
class StateRef:
    """
    # Reference to an environment state
    # index: tabular state index (None for continuous states)
    # coords: continuous coordinates (None for tabular states)
    # terminal: whether the state ends the episode
    """
    index: Optional[int] = None
    coords: Optional[Tuple[float, ...]] = None
    terminal: bool = False

    @classmethod
    def tabular(cls, index: int, terminal: bool = False) -> 'StateRef':
        if index is not None and index < 0:
            raise ContractViolation(f"상태 인덱스는 음수일 수 없습니다: {index}")
        return cls(index=index, terminal=terminal)

    @classmethod
    def continuous(cls, coords: Sequence[float], terminal: bool = False) -> 'StateRef':
        return cls(coords=tuple(float(c) for c in coords), terminal=terminal)

    @classmethod
    def terminal_state(cls) -> 'StateRef':
        return cls(terminal=True)

    @property
    def is_tabular(self) -> bool:
        return self.index is not None


def require_non_terminal(state: StateRef, operation: str) -> None:
    if state.terminal:
        raise ContractViolation(f"종료 상태에서는 {operation}을(를) 수행할 수 없습니다.")


def require_unit_interval(value: float, name: str) -> None:
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ContractViolation(f"{name} 값은 [0, 1] 범위여야 합니다: {value}")


class RngStream:
    """
    # Seeded random stream owned by a single run
    # Identical seed and identical call sequence give identical outputs
    """
    def __init__(self, seed: int):
        self.seed = int(seed)
        self.generator = np.random.default_rng(self.seed)

    @classmethod
    def for_run(cls, base_seed: int, run_index: int) -> 'RngStream':
        return cls(base_seed + run_index)

    def random(self) -> float:
        return float(self.generator.random())

    def uniform(self, low: float, high: float) -> float:
        return float(self.generator.uniform(low, high))

    def integers(self, high: int) -> int:
        return int(self.generator.integers(high))

    def choice(self, probabilities: np.ndarray) -> int:
        """
        # Sample an index according to a probability vector (inverse CDF)
        """
        cumulative = np.cumsum(probabilities)
        u = self.generator.random() * cumulative[-1]
        index = int(np.searchsorted(cumulative, u, side='right'))
        # Guard against u landing exactly on the final bound
        return min(index, len(probabilities) - 1)
