import logging
import time
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .action_values import ActionValues, LinearActionValues, TabularActionValues
from .agent import QSigmaAgent, make_algorithm
from .config_handler import ConfigValidationError, ExperimentConfig
from .core_types import RngStream
from .environments import EpisodicEnvironment, MountainCliffEnv, make_environment
from .oracle import rms_state_value_error
from .policy import EpsilonGreedyPolicy, EquiprobablePolicy, PolicyModel
from .run_manager import RunManager
from .run_statistics import RunStatistics
from .sigma_schedule import ConstantSigma, EpisodeDecaySigma, SigmaSchedule
from .tile_coder import TileCoder

logger = logging.getLogger(__name__)


def build_action_values(env: EpisodicEnvironment) -> ActionValues:
    """
    # Zero-initialised Q: a table for tabular environments, tile-coded weights otherwise
    """
    if env.is_tabular:
        return TabularActionValues(env.num_states, env.num_actions)
    coder = TileCoder([MountainCliffEnv.POSITION_RANGE, MountainCliffEnv.VELOCITY_RANGE], env.num_actions)
    return LinearActionValues(coder, env.num_actions)


def build_behavior(config: ExperimentConfig, q: ActionValues) -> PolicyModel:
    if config.policy == 'equiprobable':
        return EquiprobablePolicy(q.num_actions)
    return EpsilonGreedyPolicy(q, config.epsilon)


def build_sigma_schedule(config: ExperimentConfig) -> SigmaSchedule:
    if config.sigma_schedule == 'episode_decay':
        return EpisodeDecaySigma(config.sigma, config.sigma_decay)
    return ConstantSigma(config.sigma)


def build_agent(config: ExperimentConfig, env: EpisodicEnvironment) -> QSigmaAgent:
    q = build_action_values(env)
    return make_algorithm(config.algorithm, q, build_behavior(config, q), config.n, config.alpha,
                          config.gamma, sigma_schedule=build_sigma_schedule(config))


def play_episode(env: EpisodicEnvironment, agent: QSigmaAgent, rng: RngStream, max_steps: int = 0) -> float:
    """
    # Play one learning episode and return its undiscounted return
    # max_steps: truncate the episode after this many steps (0 = unlimited)
    """
    state = env.reset(rng)
    action = agent.begin_episode(state, rng)
    total = 0.0
    steps = 0
    while True:
        reward, state, terminal = env.step(state, action, rng)
        total += reward
        steps += 1
        action = agent.step(reward, state, rng)
        if terminal:
            break
        if max_steps and steps >= max_steps:
            agent.truncate_episode()
            break
    agent.finish_episode()
    return total


def run_single(config: ExperimentConfig, run_index: int) -> np.ndarray:
    """
    # One independent run seeded with config.seed + run_index
    # Returns: the configured measurement for each episode
    """
    rng = RngStream.for_run(config.seed, run_index)
    env = make_environment(config.environment)
    agent = build_agent(config, env)
    truth = env.true_values() if config.measurement == 'rms_per_episode' else None
    values = np.empty(config.episodes)
    for episode in range(config.episodes):
        episode_return = play_episode(env, agent, rng, config.max_episode_steps)
        if truth is None:
            values[episode] = episode_return
        else:
            values[episode] = rms_state_value_error(agent.q, agent.target, truth)
    return values


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> RunStatistics:
    """
    # Execute config.runs independent runs and aggregate them
    # workers: worker process count (default: logical CPU count); never changes the numbers
    """
    config.validate()
    logger.info(f"실험 시작: {config.name} ({config.environment}, {config.algorithm}, n={config.n}, "
                f"alpha={config.alpha:g}, {config.runs}회 x {config.episodes} 에피소드)")
    started = time.time()
    results = RunManager(workers).execute(run_single, config, config.runs)
    stats = RunStatistics(np.vstack(results), window=config.moving_average_window)
    logger.info(f"실험 완료: {config.name} ({time.time() - started:.1f}초)")
    return stats


def sweep_alpha(config: ExperimentConfig, alphas: Optional[Sequence[float]] = None,
                workers: Optional[int] = None) -> pd.DataFrame:
    """
    # Overall mean (and its standard error) of the measurement for each step size
    # alphas: step sizes to try (default: config.alphas)
    """
    alphas = list(config.alphas if alphas is None else alphas)
    if not alphas:
        raise ConfigValidationError(f"[{config.name}] alpha 스윕 목록이 비어 있습니다.")
    rows = []
    for alpha in alphas:
        stats = run_experiment(replace(config, alpha=float(alpha)), workers)
        mean, stderr = stats.overall_mean
        rows.append({'alpha': float(alpha), 'mean': mean, 'stderr': stderr})
    return pd.DataFrame(rows, columns=['alpha', 'mean', 'stderr'])
