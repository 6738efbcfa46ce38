import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .core_types import ActionId, ContractViolation, RngStream, StateRef, require_non_terminal

# (probability, reward, next state index or None when terminal, terminal)
Outcome = Tuple[float, float, Optional[int], bool]


class EpisodicEnvironment:
    """
    # Episodic environment contract: reset -> state, step(state, action) -> (reward, next, terminal)
    """
    name = ''
    num_actions = 0
    num_states: Optional[int] = None
    episodic = True

    @property
    def is_tabular(self) -> bool:
        return self.num_states is not None

    def reset(self, rng: RngStream) -> StateRef:
        raise NotImplementedError

    def step(self, state: StateRef, action: ActionId, rng: RngStream) -> Tuple[float, StateRef, bool]:
        raise NotImplementedError

    def transition_distribution(self, index: int, action: ActionId) -> List[Outcome]:
        """
        # Exact outcome distribution of a tabular (state, action) pair
        """
        raise NotImplementedError(f"{self.name} 환경은 전이 모델을 열거할 수 없습니다.")

    def _check(self, state: StateRef, action: ActionId) -> None:
        require_non_terminal(state, "환경 전이")
        if not (0 <= action < self.num_actions):
            raise ContractViolation(f"{self.name}: 잘못된 행동 인덱스: {action}")

    def _next_state(self, index: Optional[int], terminal: bool) -> StateRef:
        if terminal:
            return StateRef.terminal_state()
        return StateRef.tabular(index)


class RandomWalkEnv(EpisodicEnvironment):
    """
    # 19-state random walk with two deterministic actions (0 = left, 1 = right)
    # Leaving on the left pays -1, on the right +1; the start is the centre state
    """
    name = 'random_walk_19'
    LEFT, RIGHT = 0, 1

    def __init__(self, num_states: int = 19):
        self.num_states = num_states
        self.num_actions = 2
        self.start = num_states // 2

    def reset(self, rng: RngStream) -> StateRef:
        return StateRef.tabular(self.start)

    def transition_distribution(self, index: int, action: ActionId) -> List[Outcome]:
        nxt = index - 1 if action == self.LEFT else index + 1
        if nxt < 0:
            return [(1.0, -1.0, None, True)]
        if nxt >= self.num_states:
            return [(1.0, 1.0, None, True)]
        return [(1.0, 0.0, nxt, False)]

    def step(self, state: StateRef, action: ActionId, rng: RngStream) -> Tuple[float, StateRef, bool]:
        self._check(state, action)
        _, reward, nxt, terminal = self.transition_distribution(state.index, action)[0]
        return reward, self._next_state(nxt, terminal), terminal

    def true_values(self) -> np.ndarray:
        return random_walk_true_values(self.num_states)


def random_walk_true_values(num_states: int = 19) -> np.ndarray:
    """
    # State values of the random walk under the equiprobable policy, gamma = 1,
    # from a direct solve of the tridiagonal Bellman system
    """
    a = np.eye(num_states)
    b = np.zeros(num_states)
    for i in range(num_states):
        if i > 0:
            a[i, i - 1] -= 0.5
        else:
            b[i] -= 0.5
        if i < num_states - 1:
            a[i, i + 1] -= 0.5
        else:
            b[i] += 0.5
    return np.linalg.solve(a, b)


class WindyGridworldEnv(EpisodicEnvironment):
    """
    # 10 x 7 windy gridworld; rows grow downward and wind pushes toward row 0
    # Actions: 0 = up, 1 = down, 2 = left, 3 = right. Reward -1 per step.
    # The move is applied first, then the wind of the origin column, then clamping.
    # Stochastic variant: with probability 0.1 the next state is one of the 8 surrounding
    # cells (each clamped onto the grid), ignoring both action and wind.
    """
    WIDTH = 10
    HEIGHT = 7
    WIND = (0, 0, 0, 1, 1, 1, 2, 2, 1, 0)
    START = (0, 3)
    GOAL = (7, 3)
    MOVES = ((0, -1), (0, 1), (-1, 0), (1, 0))
    NEIGHBOURS = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))

    def __init__(self, stochastic: bool = False, jump_probability: float = 0.1):
        self.stochastic = stochastic
        self.jump_probability = jump_probability if stochastic else 0.0
        self.name = 'windy_gridworld_stochastic' if stochastic else 'windy_gridworld'
        self.num_states = self.WIDTH * self.HEIGHT
        self.num_actions = len(self.MOVES)
        self.jumped = False

    def index_of(self, col: int, row: int) -> int:
        return row * self.WIDTH + col

    def position_of(self, index: int) -> Tuple[int, int]:
        return index % self.WIDTH, index // self.WIDTH

    def _clamp(self, col: int, row: int) -> Tuple[int, int]:
        return min(max(col, 0), self.WIDTH - 1), min(max(row, 0), self.HEIGHT - 1)

    def _moved(self, index: int, action: ActionId) -> Tuple[int, int]:
        col, row = self.position_of(index)
        dc, dr = self.MOVES[action]
        return self._clamp(col + dc, row + dr - self.WIND[col])

    def _jump_targets(self, index: int) -> List[Tuple[int, int]]:
        col, row = self.position_of(index)
        return [self._clamp(col + dc, row + dr) for dc, dr in self.NEIGHBOURS]

    def _outcome(self, cell: Tuple[int, int]) -> Tuple[Optional[int], bool]:
        if cell == self.GOAL:
            return None, True
        return self.index_of(*cell), False

    def reset(self, rng: RngStream) -> StateRef:
        return StateRef.tabular(self.index_of(*self.START))

    def step(self, state: StateRef, action: ActionId, rng: RngStream) -> Tuple[float, StateRef, bool]:
        self._check(state, action)
        self.jumped = False
        if self.stochastic and rng.random() < self.jump_probability:
            self.jumped = True
            cell = self._jump_targets(state.index)[rng.integers(len(self.NEIGHBOURS))]
        else:
            cell = self._moved(state.index, action)
        nxt, terminal = self._outcome(cell)
        return -1.0, self._next_state(nxt, terminal), terminal

    def transition_distribution(self, index: int, action: ActionId) -> List[Outcome]:
        outcomes = []
        nxt, terminal = self._outcome(self._moved(index, action))
        outcomes.append((1.0 - self.jump_probability, -1.0, nxt, terminal))
        if self.jump_probability > 0.0:
            share = self.jump_probability / len(self.NEIGHBOURS)
            for cell in self._jump_targets(index):
                nxt, terminal = self._outcome(cell)
                outcomes.append((share, -1.0, nxt, terminal))
        return outcomes


class MountainCliffEnv(EpisodicEnvironment):
    """
    # Mountain car with a cliff past the left hill
    # Crossing x <= -1.2 pays -100 and teleports the car to a random valley start (not terminal);
    # reaching x >= 0.5 ends the episode. Every other step pays -1.
    """
    name = 'mountain_cliff'
    POSITION_RANGE = (-1.2, 0.5)
    VELOCITY_RANGE = (-0.07, 0.07)
    START_RANGE = (-0.6, -0.4)
    FORCE = 0.001
    GRAVITY = 0.0025
    CLIFF_REWARD = -100.0
    STEP_REWARD = -1.0

    def __init__(self):
        self.num_states = None
        self.num_actions = 3
        self.fell = False

    def _start(self, rng: RngStream) -> StateRef:
        return StateRef.continuous((rng.uniform(*self.START_RANGE), 0.0))

    def reset(self, rng: RngStream) -> StateRef:
        return self._start(rng)

    def step(self, state: StateRef, action: ActionId, rng: RngStream) -> Tuple[float, StateRef, bool]:
        self._check(state, action)
        x, v = state.coords
        throttle = action - 1
        v = v + self.FORCE * throttle - self.GRAVITY * math.cos(3.0 * x)
        v = min(max(v, self.VELOCITY_RANGE[0]), self.VELOCITY_RANGE[1])
        x = x + v
        self.fell = False
        if x <= self.POSITION_RANGE[0]:
            self.fell = True
            return self.CLIFF_REWARD, self._start(rng), False
        if x >= self.POSITION_RANGE[1]:
            return self.STEP_REWARD, StateRef.continuous((self.POSITION_RANGE[1], v), terminal=True), True
        return self.STEP_REWARD, StateRef.continuous((x, v)), False


class MDPEnvironment(EpisodicEnvironment):
    """
    # Any TabularMDP behind the episodic environment contract
    # start: fixed start index, or None for a uniformly random non-terminal start
    """
    def __init__(self, mdp, start: Optional[int] = None, name: str = 'tabular_mdp'):
        self.mdp = mdp
        self.start = start
        self.name = name
        self.num_states = mdp.num_states
        self.num_actions = mdp.num_actions

    def reset(self, rng: RngStream) -> StateRef:
        if self.start is not None:
            return StateRef.tabular(self.start)
        candidates = np.flatnonzero(~self.mdp.terminal)
        return StateRef.tabular(int(candidates[rng.integers(len(candidates))]))

    def step(self, state: StateRef, action: ActionId, rng: RngStream) -> Tuple[float, StateRef, bool]:
        self._check(state, action)
        reward, nxt = self.mdp.sample(state.index, action, rng)
        terminal = bool(self.mdp.terminal[nxt])
        return reward, StateRef.tabular(nxt, terminal=terminal), terminal


ENVIRONMENTS: Dict[str, Callable[[], EpisodicEnvironment]] = {
    'random_walk_19': RandomWalkEnv,
    'windy_gridworld': WindyGridworldEnv,
    'windy_gridworld_stochastic': lambda: WindyGridworldEnv(stochastic=True),
    'mountain_cliff': MountainCliffEnv,
}


def make_environment(name: str) -> EpisodicEnvironment:
    if name not in ENVIRONMENTS:
        raise ContractViolation(f"알 수 없는 환경: {name} (지원: {', '.join(ENVIRONMENTS)})")
    return ENVIRONMENTS[name]()
