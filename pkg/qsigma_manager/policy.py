import numpy as np

from .action_values import ActionValues
from .core_types import ActionId, ContractViolation, RngStream, StateRef, require_non_terminal, require_unit_interval


class PolicyModel:
    """
    # Source of action probabilities pi(a|s)
    """
    num_actions: int

    def probabilities(self, state: StateRef) -> np.ndarray:
        raise NotImplementedError

    def probabilities_given(self, state: StateRef, q: ActionValues, q_row: np.ndarray) -> np.ndarray:
        """
        # probabilities(state) reusing an already computed row q_row = q.values(state)
        """
        return self.probabilities(state)

    def prob(self, state: StateRef, action: ActionId) -> float:
        """
        # Probability of taking `action` in a non-terminal `state`
        """
        if not (0 <= action < self.num_actions):
            raise ContractViolation(f"행동 인덱스 범위 초과: {action}")
        return float(self.probabilities(state)[action])

    def sample(self, state: StateRef, rng: RngStream) -> ActionId:
        return rng.choice(self.probabilities(state))


class EquiprobablePolicy(PolicyModel):
    def __init__(self, num_actions: int):
        self.num_actions = num_actions
        self._probs = np.full(num_actions, 1.0 / num_actions)

    def probabilities(self, state: StateRef) -> np.ndarray:
        require_non_terminal(state, "정책 확률 계산")
        return self._probs.copy()


class EpsilonGreedyPolicy(PolicyModel):
    """
    # epsilon-greedy on a live ActionValues reference
    # Tied maxima share the greedy mass (1 - epsilon) equally
    """
    def __init__(self, q: ActionValues, epsilon: float):
        require_unit_interval(epsilon, "epsilon")
        self.q = q
        self.epsilon = epsilon
        self.num_actions = q.num_actions

    def _from_row(self, row: np.ndarray) -> np.ndarray:
        maximizers = np.flatnonzero(row == row.max())
        probs = np.full(self.num_actions, self.epsilon / self.num_actions)
        probs[maximizers] += (1.0 - self.epsilon) / len(maximizers)
        return probs

    def probabilities(self, state: StateRef) -> np.ndarray:
        require_non_terminal(state, "정책 확률 계산")
        return self._from_row(self.q.values(state))

    def probabilities_given(self, state: StateRef, q: ActionValues, q_row: np.ndarray) -> np.ndarray:
        if q is not self.q:
            return self.probabilities(state)
        require_non_terminal(state, "정책 확률 계산")
        return self._from_row(q_row)


class GreedyPolicy(EpsilonGreedyPolicy):
    def __init__(self, q: ActionValues):
        super().__init__(q, 0.0)
