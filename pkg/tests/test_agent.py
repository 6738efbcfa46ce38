import numpy as np
import pytest

from qsigma_manager.action_values import TabularActionValues
from qsigma_manager.agent import QSigmaAgent, make_algorithm, one_step_q_sigma_update
from qsigma_manager.core_types import ContractViolation, RngStream, StateRef
from qsigma_manager.environments import MDPEnvironment, RandomWalkEnv, WindyGridworldEnv
from qsigma_manager.experiment import play_episode
from qsigma_manager.oracle import TabularMDP, greedy_policy, policy_evaluation, random_mdp, value_iteration
from qsigma_manager.policy import EpsilonGreedyPolicy, EquiprobablePolicy, GreedyPolicy
from qsigma_manager.returns import importance_ratio_sigma, nstep_return_q_sigma
from qsigma_manager.sigma_schedule import ConstantSigma, EpisodeDecaySigma, SigmaSchedule


class RandomSigma(SigmaSchedule):
    """
    # A fresh sigma for every step
    """
    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)

    @property
    def value(self) -> float:
        return float(self.rng.uniform())


class CheckedAgent(QSigmaAgent):
    """
    # Compares every incremental update with the closed-form return and ratio
    """
    checked = 0

    def apply_nstep_update(self, tau):
        segment = self.segment(tau)
        expected_g = nstep_return_q_sigma(segment)
        expected_rho = importance_ratio_sigma(segment)
        g, rho = super().apply_nstep_update(tau)
        assert abs(g - expected_g) <= 1e-12 * (1.0 + abs(expected_g))
        assert abs(rho - expected_rho) <= 1e-12 * (1.0 + abs(expected_rho))
        self.checked += 1
        return g, rho


class OnPolicyCheckedAgent(CheckedAgent):
    """
    # Behavior and target are one policy object, so every applied ratio must be 1
    """
    def apply_nstep_update(self, tau):
        g, rho = super().apply_nstep_update(tau)
        assert abs(rho - 1.0) <= 1e-15
        return g, rho


def _deterministic_mdp(moves, gamma):
    """
    # moves[s][a] = (reward, next state or None for the terminal state)
    """
    num_states = len(moves)
    num_actions = len(moves[0])
    transitions = np.zeros((num_states + 1, num_actions, num_states + 1))
    rewards = np.zeros_like(transitions)
    for s, row in enumerate(moves):
        for a, (reward, nxt) in enumerate(row):
            target = num_states if nxt is None else nxt
            transitions[s, a, target] = 1.0
            rewards[s, a, target] = reward
    transitions[num_states, :, num_states] = 1.0
    terminal = np.zeros(num_states + 1, dtype=bool)
    terminal[num_states] = True
    return TabularMDP(transitions, rewards, terminal, gamma)


def _mdp_env(seed=5):
    return MDPEnvironment(random_mdp(6, 3, seed=seed, gamma=0.9, termination_probability=0.15))


@pytest.mark.parametrize('n', [1, 2, 3, 5])
def test_incremental_updates_match_closed_form(n):
    env = _mdp_env()
    q = TabularActionValues(env.num_states, env.num_actions)
    agent = CheckedAgent(q, EpsilonGreedyPolicy(q, 0.3), EpsilonGreedyPolicy(q, 0.05), n=n, alpha=0.3,
                         gamma=0.9, sigma_schedule=RandomSigma(n))
    rng = RngStream(n)
    for _ in range(25):
        play_episode(env, agent, rng)
    assert agent.checked == agent.updates_applied
    assert agent.checked > 25


def test_expected_sarsa_override_matches_closed_form():
    env = _mdp_env(seed=9)
    q = TabularActionValues(env.num_states, env.num_actions)
    behavior = EpsilonGreedyPolicy(q, 0.2)
    agent = CheckedAgent(q, behavior, behavior, n=3, alpha=0.4, gamma=0.9,
                         sigma_schedule=ConstantSigma(1.0), final_sigma=0.0)
    rng = RngStream(0)
    for _ in range(25):
        play_episode(env, agent, rng)
    assert agent.checked == agent.updates_applied > 0


class CountingValues(TabularActionValues):
    row_lookups = 0

    def values(self, state):
        self.row_lookups += 1
        return super().values(state)


@pytest.mark.parametrize('name', ['sarsa', 'q_learning'])
def test_one_action_value_row_per_visited_state(name):
    env = WindyGridworldEnv()
    q = CountingValues(env.num_states, env.num_actions)
    agent = make_algorithm(name, q, EpsilonGreedyPolicy(q, 0.1), n=3, alpha=0.5, gamma=1.0)
    rng = RngStream(1)
    state = env.reset(rng)
    action = agent.begin_episode(state, rng)
    visited = 1
    while True:
        reward, state, terminal = env.step(state, action, rng)
        action = agent.step(reward, state, rng)
        if terminal:
            break
        visited += 1
    agent.finish_episode()
    assert q.row_lookups == visited


@pytest.mark.parametrize('n', [1, 4])
def test_on_policy_ratio_is_exactly_one(n):
    env = WindyGridworldEnv(stochastic=True)
    q = TabularActionValues(env.num_states, env.num_actions)
    policy = EpsilonGreedyPolicy(q, 0.2)
    agent = OnPolicyCheckedAgent(q, policy, policy, n=n, alpha=0.5, gamma=1.0, sigma_schedule=RandomSigma(n))
    rng = RngStream(3)
    for _ in range(10):
        play_episode(env, agent, rng)
    assert agent.checked == agent.updates_applied > 100


@pytest.mark.parametrize('sigma', [0.0, 0.5, 1.0])
def test_n1_agent_equals_one_step_update_bit_for_bit(sigma):
    env = RandomWalkEnv()
    q_agent = TabularActionValues(env.num_states, env.num_actions)
    q_direct = TabularActionValues(env.num_states, env.num_actions)
    behavior = EpsilonGreedyPolicy(q_agent, 0.2)
    direct_target = EpsilonGreedyPolicy(q_direct, 0.2)
    agent = QSigmaAgent(q_agent, behavior, behavior, n=1, alpha=0.4, gamma=0.95,
                        sigma_schedule=ConstantSigma(sigma))
    rng = RngStream(42)
    for _ in range(20):
        state = env.reset(rng)
        action = agent.begin_episode(state, rng)
        while True:
            reward, next_state, terminal = env.step(state, action, rng)
            next_action = agent.step(reward, next_state, rng)
            one_step_q_sigma_update(q_direct, state, action, reward, next_state, next_action,
                                    sigma, 0.4, 0.95, direct_target)
            assert np.array_equal(q_agent.table, q_direct.table)
            if terminal:
                break
            state, action = next_state, next_action
        agent.finish_episode()
    assert np.any(q_agent.table != 0.0)


def test_finish_episode_flushes_remaining_updates():
    env = RandomWalkEnv(num_states=3)
    q = TabularActionValues(3, 2)
    agent = QSigmaAgent(q, EquiprobablePolicy(2), EquiprobablePolicy(2), n=5, alpha=0.5, gamma=1.0,
                        sigma_schedule=ConstantSigma(1.0))
    rng = RngStream(0)
    state = env.reset(rng)
    action = agent.begin_episode(state, rng)
    length = 0
    while True:
        reward, state, terminal = env.step(state, action, rng)
        length += 1
        action = agent.step(reward, state, rng)
        if terminal:
            break
    assert agent.updates_applied == max(0, length - 4)
    agent.finish_episode()
    assert agent.updates_applied == length
    assert all(record is None for record in agent.buffer)


def test_truncated_episode_updates_every_visited_pair():
    env = WindyGridworldEnv()
    q = TabularActionValues(env.num_states, env.num_actions)
    agent = make_algorithm('sarsa', q, EpsilonGreedyPolicy(q, 0.1), n=4, alpha=0.5, gamma=1.0)
    play_episode(env, agent, RngStream(0), max_steps=7)
    assert agent.updates_applied == 7
    assert not agent.active


def test_sigma_schedule_advances_per_episode():
    env = RandomWalkEnv()
    q = TabularActionValues(env.num_states, 2)
    schedule_agent = make_algorithm('q_sigma', q, EquiprobablePolicy(2), n=3, alpha=0.4, gamma=1.0,
                                    sigma_schedule=EpisodeDecaySigma(1.0, 0.5))
    rng = RngStream(0)
    play_episode(env, schedule_agent, rng)
    play_episode(env, schedule_agent, rng)
    assert schedule_agent.sigma_schedule.value == 0.25


class TestProtocol:
    def _agent(self, n=2):
        q = TabularActionValues(3, 2)
        return QSigmaAgent(q, EquiprobablePolicy(2), EquiprobablePolicy(2), n=n, alpha=0.5, gamma=1.0,
                           sigma_schedule=ConstantSigma(0.5))

    def test_terminal_start(self):
        with pytest.raises(ContractViolation):
            self._agent().begin_episode(StateRef.terminal_state(), RngStream(0))

    def test_step_before_begin(self):
        with pytest.raises(ContractViolation):
            self._agent().step(0.0, StateRef.tabular(1), RngStream(0))

    def test_begin_twice(self):
        agent = self._agent()
        agent.begin_episode(StateRef.tabular(0), RngStream(0))
        with pytest.raises(ContractViolation):
            agent.begin_episode(StateRef.tabular(0), RngStream(0))

    def test_step_after_terminal(self):
        agent = self._agent()
        rng = RngStream(0)
        agent.begin_episode(StateRef.tabular(0), rng)
        assert agent.step(1.0, StateRef.terminal_state(), rng) is None
        with pytest.raises(ContractViolation):
            agent.step(0.0, StateRef.tabular(1), rng)

    def test_finish_before_terminal(self):
        agent = self._agent()
        agent.begin_episode(StateRef.tabular(0), RngStream(0))
        with pytest.raises(ContractViolation):
            agent.finish_episode()

    def test_non_finite_reward(self):
        agent = self._agent()
        rng = RngStream(0)
        agent.begin_episode(StateRef.tabular(0), rng)
        with pytest.raises(ContractViolation):
            agent.step(float('inf'), StateRef.tabular(1), rng)

    @pytest.mark.parametrize('kwargs', [{'n': 0}, {'alpha': 0.0}, {'alpha': 1.5}, {'gamma': 1.1}])
    def test_invalid_parameters(self, kwargs):
        q = TabularActionValues(3, 2)
        params = dict(n=1, alpha=0.5, gamma=1.0)
        params.update(kwargs)
        with pytest.raises(ContractViolation):
            QSigmaAgent(q, EquiprobablePolicy(2), EquiprobablePolicy(2), sigma_schedule=ConstantSigma(1.0),
                        **params)


class TestMakeAlgorithm:
    def _make(self, name, **kwargs):
        q = TabularActionValues(3, 2)
        return make_algorithm(name, q, EpsilonGreedyPolicy(q, 0.1), n=2, alpha=0.5, gamma=1.0, **kwargs)

    def test_special_cases(self):
        assert self._make('sarsa').sigma_schedule.value == 1.0
        assert self._make('tree_backup').sigma_schedule.value == 0.0
        expected = self._make('expected_sarsa')
        assert expected.sigma_schedule.value == 1.0 and expected.final_sigma == 0.0
        q_learning = self._make('q_learning')
        assert isinstance(q_learning.target, GreedyPolicy)
        assert q_learning.sigma_schedule.value == 0.0

    def test_q_sigma_needs_schedule(self):
        with pytest.raises(ContractViolation):
            self._make('q_sigma')
        assert self._make('q_sigma', sigma_schedule=ConstantSigma(0.5)).sigma_schedule.value == 0.5

    def test_unknown(self):
        with pytest.raises(ContractViolation):
            self._make('dqn')


@pytest.mark.parametrize('sigma', [0.0, 0.5, 1.0])
def test_one_step_q_sigma_converges_to_optimal_values(sigma):
    mdp = random_mdp(10, 2, seed=2024, gamma=0.3, termination_probability=0.2)
    q_star = value_iteration(mdp)
    q = TabularActionValues(mdp.num_states, mdp.num_actions)
    visits = np.zeros((mdp.num_states, mdp.num_actions))
    rng = RngStream(7)
    for episode in range(1, 20001):
        policy = EpsilonGreedyPolicy(q, 1.0 / episode)
        # exploring starts keep every pair visited while epsilon decays
        s, a = rng.integers(10), rng.integers(2)
        while True:
            reward, nxt = mdp.sample(s, a, rng)
            terminal = bool(mdp.terminal[nxt])
            next_state = StateRef.tabular(nxt, terminal=terminal)
            next_action = None if terminal else policy.sample(next_state, rng)
            visits[s, a] += 1
            one_step_q_sigma_update(q, StateRef.tabular(s), a, reward, next_state, next_action, sigma,
                                    1.0 / visits[s, a], mdp.gamma, policy)
            if terminal:
                break
            s, a = nxt, next_action
    assert np.max(np.abs(q.table[:10] - q_star[:10])) < 0.05


@pytest.mark.parametrize('n', [1, 3])
def test_q_learning_converges_to_value_iteration(n):
    # state 0: a0 -> state 1 (0), a1 -> end (+1); state 1: a0 -> end (+2), a1 -> state 0 (-1)
    mdp = _deterministic_mdp([[(0.0, 1), (1.0, None)], [(2.0, None), (-1.0, 0)]], gamma=0.9)
    q_star = value_iteration(mdp)
    env = MDPEnvironment(mdp)
    q = TabularActionValues(mdp.num_states, mdp.num_actions)
    agent = make_algorithm('q_learning', q, EpsilonGreedyPolicy(q, 0.3), n=n, alpha=0.3, gamma=mdp.gamma)
    rng = RngStream(11)
    for _ in range(3000):
        play_episode(env, agent, rng)
    assert q_star[0] == pytest.approx([1.8, 1.0])
    assert np.max(np.abs(q.table[:2] - q_star[:2])) < 1e-3


def test_off_policy_tree_backup_converges_on_chain():
    # five-state chain: falling off the left end pays -1, leaving on the right pays +1
    moves = [[(-1.0, None) if s == 0 else (0.0, s - 1), (1.0, None) if s == 4 else (0.0, s + 1)]
             for s in range(5)]
    mdp = _deterministic_mdp(moves, gamma=0.9)
    env = MDPEnvironment(mdp)
    q = TabularActionValues(mdp.num_states, mdp.num_actions)
    target = GreedyPolicy(q)
    agent = make_algorithm('tree_backup', q, EpsilonGreedyPolicy(q, 0.3), n=3, alpha=0.3, gamma=mdp.gamma,
                           target=target)
    assert agent.target is target
    rng = RngStream(5)
    for _ in range(3000):
        play_episode(env, agent, rng)
    on_target = policy_evaluation(mdp, greedy_policy(q.table))
    assert np.max(np.abs(q.table[:5].max(axis=1) - on_target[:5])) < 0.05
    assert np.max(np.abs(q.table[:5] - value_iteration(mdp)[:5])) < 0.05
