import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .action_values import ActionValues, TabularActionValues
from .core_types import ContractViolation, RngStream, StateRef
from .environments import EpisodicEnvironment
from .policy import GreedyPolicy, PolicyModel

logger = logging.getLogger(__name__)

MAX_SWEEPS = 10 ** 6


@dataclass
class TabularMDP:
    """
    # Finite MDP with absorbing terminal states
    # transitions[s, a, s'] = p(s'|s,a); rewards[s, a, s'] = expected reward of that transition
    """
    transitions: np.ndarray
    rewards: np.ndarray
    terminal: np.ndarray
    gamma: float = 1.0

    def __post_init__(self):
        self.transitions = np.asarray(self.transitions, dtype=float)
        self.rewards = np.asarray(self.rewards, dtype=float)
        self.terminal = np.asarray(self.terminal, dtype=bool)
        if not (0.0 <= self.gamma <= 1.0):
            raise ContractViolation(f"gamma 값은 [0, 1] 범위여야 합니다: {self.gamma}")
        sums = self.transitions[~self.terminal].sum(axis=2)
        if sums.size and np.max(np.abs(sums - 1.0)) > 1e-12:
            raise ContractViolation("전이 확률의 합이 1이 아닌 (상태, 행동) 쌍이 있습니다.")

    @property
    def num_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transitions.shape[1]

    @property
    def expected_rewards(self) -> np.ndarray:
        return np.sum(self.transitions * self.rewards, axis=2)

    def sample(self, s: int, a: int, rng: RngStream) -> Tuple[float, int]:
        nxt = rng.choice(self.transitions[s, a])
        return float(self.rewards[s, a, nxt]), nxt


def enumerate_mdp(env: EpisodicEnvironment, gamma: float = 1.0) -> TabularMDP:
    """
    # Exact model of a tabular environment; all terminal outcomes lead to one
    # extra absorbing state with index env.num_states
    """
    if not env.is_tabular:
        raise NotImplementedError(f"연속 상태 환경은 열거할 수 없습니다: {env.name}")
    n, m = env.num_states, env.num_actions
    absorbing = n
    transitions = np.zeros((n + 1, m, n + 1))
    rewards = np.zeros((n + 1, m, n + 1))
    for s in range(n):
        for a in range(m):
            weighted = np.zeros(n + 1)
            for prob, reward, nxt, terminal in env.transition_distribution(s, a):
                target = absorbing if terminal else nxt
                transitions[s, a, target] += prob
                weighted[target] += prob * reward
            reached = transitions[s, a] > 0
            rewards[s, a, reached] = weighted[reached] / transitions[s, a, reached]
    transitions[absorbing, :, absorbing] = 1.0
    terminal = np.zeros(n + 1, dtype=bool)
    terminal[absorbing] = True
    logger.debug(f"MDP 열거 완료: {env.name}, 상태 {n + 1}개, 행동 {m}개")
    return TabularMDP(transitions, rewards, terminal, gamma)


def random_mdp(num_states: int, num_actions: int, seed: int, gamma: float = 0.9,
               termination_probability: float = 0.1, branching: int = 3,
               reward_range: Tuple[float, float] = (-1.0, 1.0)) -> TabularMDP:
    """
    # Seeded random episodic MDP: num_states regular states plus one absorbing terminal
    # Each (s, a) moves to `branching` random successors, or terminates with the given probability
    """
    rng = np.random.default_rng(seed)
    total = num_states + 1
    transitions = np.zeros((total, num_actions, total))
    rewards = np.zeros((total, num_actions, total))
    for s in range(num_states):
        for a in range(num_actions):
            successors = rng.choice(num_states, size=min(branching, num_states), replace=False)
            weights = rng.dirichlet(np.ones(len(successors))) * (1.0 - termination_probability)
            transitions[s, a, successors] = weights
            transitions[s, a, num_states] = termination_probability
            rewards[s, a, :] = rng.uniform(*reward_range, size=total)
        # renormalize against rounding so each row sums to one
        transitions[s] /= transitions[s].sum(axis=1, keepdims=True)
    transitions[num_states, :, num_states] = 1.0
    terminal = np.zeros(total, dtype=bool)
    terminal[num_states] = True
    return TabularMDP(transitions, rewards, terminal, gamma)


def _policy_matrix(mdp: TabularMDP, policy: PolicyModel) -> np.ndarray:
    probs = np.zeros((mdp.num_states, mdp.num_actions))
    for s in np.flatnonzero(~mdp.terminal):
        probs[s] = policy.probabilities(StateRef.tabular(int(s)))
    return probs


def policy_evaluation(mdp: TabularMDP, policy: PolicyModel) -> np.ndarray:
    """
    # Solve v = r_pi + gamma P_pi v over the non-terminal states (terminal values are 0)
    """
    live = np.flatnonzero(~mdp.terminal)
    probs = _policy_matrix(mdp, policy)
    p_pi = np.einsum('sa,sat->st', probs, mdp.transitions)[np.ix_(live, live)]
    r_pi = np.sum(probs * mdp.expected_rewards, axis=1)[live]
    system = np.eye(len(live)) - mdp.gamma * p_pi
    try:
        if np.linalg.cond(system) > 1e12:
            raise np.linalg.LinAlgError("singular")
        solution = np.linalg.solve(system, r_pi)
    except np.linalg.LinAlgError as e:
        raise ValueError("정책 평가 선형 시스템이 특이 행렬입니다 (종료되지 않는 정책).") from e
    values = np.zeros(mdp.num_states)
    values[live] = solution
    return values


def value_iteration(mdp: TabularMDP, tolerance: float = 1e-10, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """
    # Optimal action values Q* by synchronous value iteration
    # Stops when the sup-norm Bellman residual falls below `tolerance`
    """
    expected = mdp.expected_rewards
    q = np.zeros((mdp.num_states, mdp.num_actions))
    for sweep in range(max_sweeps):
        v = np.where(mdp.terminal, 0.0, q.max(axis=1))
        updated = expected + mdp.gamma * mdp.transitions @ v
        updated[mdp.terminal] = 0.0
        residual = np.max(np.abs(updated - q))
        q = updated
        if residual < tolerance:
            logger.debug(f"가치 반복 수렴: {sweep + 1}회, 잔차 {residual:.3e}")
            return q
    raise RuntimeError(f"가치 반복이 {max_sweeps}회 안에 수렴하지 않았습니다.")


def bellman_residual(mdp: TabularMDP, q: np.ndarray) -> float:
    v = np.where(mdp.terminal, 0.0, q.max(axis=1))
    backed_up = mdp.expected_rewards + mdp.gamma * mdp.transitions @ v
    live = ~mdp.terminal
    return float(np.max(np.abs(backed_up[live] - q[live])))


def greedy_policy(q_table: np.ndarray) -> GreedyPolicy:
    return GreedyPolicy(TabularActionValues.from_table(q_table))


def rms_state_value_error(q: ActionValues, policy: PolicyModel, truth: np.ndarray) -> float:
    """
    # RMS over states of (sum_a pi(a|s) Q(s,a) - v_true(s))
    """
    if not isinstance(q, TabularActionValues):
        raise ContractViolation("RMS 오차는 테이블형 Q에서만 계산할 수 있습니다.")
    truth = np.asarray(truth, dtype=float)
    if len(truth) != q.num_states:
        raise ContractViolation(f"참값 길이({len(truth)})가 상태 수({q.num_states})와 다릅니다.")
    estimate = np.array([
        np.dot(policy.probabilities(StateRef.tabular(s)), q.table[s]) for s in range(q.num_states)])
    return float(np.sqrt(np.mean((estimate - truth) ** 2)))


def greedy_rollout_return(env: EpisodicEnvironment, q_table: np.ndarray, rng: RngStream,
                          max_steps: Optional[int] = 10 ** 5) -> float:
    """
    # Undiscounted return of one episode following the greedy policy of q_table
    """
    policy = greedy_policy(q_table[:env.num_states])
    state = env.reset(rng)
    total = 0.0
    for _ in range(max_steps):
        reward, state, terminal = env.step(state, policy.sample(state, rng), rng)
        total += reward
        if terminal:
            return total
    raise RuntimeError(f"탐욕 정책이 {max_steps} 단계 안에 종료되지 않았습니다.")
