import numpy as np
import pytest
from dataclasses import replace

import pandas as pd

from qsigma_manager.acceptance import check_windygrid, reproduce, variant_label
from qsigma_manager.config_handler import ConfigHandler, ConfigValidationError, ExperimentConfig, packaged_config_path
from qsigma_manager.experiment import build_agent, run_experiment, run_single, sweep_alpha
from qsigma_manager.environments import make_environment
from qsigma_manager.action_values import LinearActionValues

WALK = ExperimentConfig(environment='random_walk_19', algorithm='q_sigma', n=3, alpha=0.4, policy='equiprobable',
                        sigma=1.0, episodes=20, runs=4, seed=3, measurement='rms_per_episode')
WINDY = ExperimentConfig(environment='windy_gridworld', algorithm='sarsa', n=2, alpha=0.5, epsilon=0.1,
                         episodes=15, runs=3, seed=0)


def test_run_single_is_deterministic():
    assert np.array_equal(run_single(WALK, 1), run_single(WALK, 1))
    assert not np.array_equal(run_single(WALK, 1), run_single(WALK, 2))


def test_random_walk_rms_decreases():
    stats = run_experiment(replace(WALK, runs=10), workers=1)
    assert stats.values.shape == (10, 20)
    assert stats.mean[-1] < stats.mean[0] < np.sqrt(0.3) + 1e-12


def test_worker_count_does_not_change_results():
    serial = run_experiment(WINDY, workers=1)
    parallel = run_experiment(WINDY, workers=2)
    assert np.array_equal(serial.values, parallel.values)


def test_windy_returns_improve():
    stats = run_experiment(replace(WINDY, episodes=60), workers=1)
    assert np.all(stats.values <= -15.0)
    assert stats.window_average(51, 60)[0] > stats.window_average(1, 10)[0]


def test_episode_step_cap():
    stats = run_experiment(replace(WINDY, max_episode_steps=5, episodes=3), workers=1)
    assert np.all(stats.values >= -5.0)


def test_mountain_cliff_uses_tile_coding():
    config = ExperimentConfig(environment='mountain_cliff', algorithm='q_sigma', n=4, alpha=0.25, sigma=0.5,
                              episodes=2, runs=1, max_episode_steps=300)
    agent = build_agent(config, make_environment('mountain_cliff'))
    assert isinstance(agent.q, LinearActionValues)
    values = run_single(config, 0)
    assert values.shape == (2,) and np.all(np.isfinite(values)) and np.all(values < 0)


def test_single_alpha_sweep_matches_overall_mean():
    sweep = sweep_alpha(WINDY, [0.5], workers=1)
    assert list(sweep.columns) == ['alpha', 'mean', 'stderr']
    assert sweep['mean'][0] == pytest.approx(run_experiment(WINDY, workers=1).overall_mean[0])


def test_empty_sweep_rejected():
    with pytest.raises(ConfigValidationError):
        sweep_alpha(WINDY, [], workers=1)


def test_variant_labels():
    assert variant_label(WINDY) == 'sarsa'
    assert variant_label(WALK) == 'sigma=1'
    assert variant_label(replace(WALK, sigma_schedule='episode_decay')) == 'dynamic'


def test_reproduce_randomwalk_small(tmp_path):
    passed, checks, summary = reproduce('randomwalk', workers=1, runs=3, out_dir=str(tmp_path))
    assert {c.name for c in checks} == {
        'early_sampling_advantage', 'late_expectation_advantage', 'dynamic_sigma_final', 'stderr_bound'}
    assert passed == all(c.passed for c in checks)
    assert 'dynamic' in summary
    assert (tmp_path / 'randomwalk_dynamic.csv').exists()
    assert len(list(tmp_path.glob('randomwalk_*.csv'))) == 6


def test_reproduce_unknown():
    with pytest.raises(ValueError):
        reproduce('cartpole')


def _windy_sweeps(overrides=None):
    handler = ConfigHandler(packaged_config_path('windygrid'))
    configs = dict(handler.experiment_configs())
    # best average return per (label, n)
    best = {'dynamic': -50.0, 'sigma=0.5': -50.2, 'sigma=0': -51.0, 'sigma=1': -52.0}
    penalty = {1: 10.0, 3: 0.0, 5: 5.0}
    sweeps = {}
    for name, config in configs.items():
        peak = best[variant_label(config)] - penalty[config.n]
        peak = (overrides or {}).get(name, peak)
        sweeps[name] = pd.DataFrame({'alpha': [0.1, 0.5, 1.0], 'mean': [peak - 3.0, peak, peak - 1.0],
                                     'stderr': [0.1, 0.1, 0.1]})
    return configs, sweeps, handler.get_acceptance()


def test_windygrid_checks_cover_shorter_and_longer_backups():
    checks = {c.name: c for c in check_windygrid(*_windy_sweeps())}
    for label in ('sigma=0', 'sigma=0.5', 'sigma=1'):
        assert checks[f"n3_beats_n1[{label}]"].passed
        assert checks[f"n3_beats_n5[{label}]"].passed
    assert checks['dynamic_sigma_best'].passed and checks['half_sigma_second'].passed
    assert all(c.passed for c in checks.values())


def test_windygrid_longer_backup_win_fails_check():
    checks = {c.name: c for c in check_windygrid(*_windy_sweeps({'sigma_1_n5': -40.0}))}
    assert not checks['n3_beats_n5[sigma=1]'].passed
    assert checks['n3_beats_n5[sigma=0]'].passed
