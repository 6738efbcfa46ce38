import logging
import math
import os
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import pandas as pd

from .config_handler import ConfigHandler, ExperimentConfig, packaged_config_path
from .csv_handler import emit_csv, emit_sweep_csv
from .experiment import run_experiment, sweep_alpha
from .run_statistics import RunStatistics

logger = logging.getLogger(__name__)

REPRODUCTIONS = ('randomwalk', 'windygrid', 'mountaincliff')


@dataclass
class AcceptanceCheck:
    name: str
    passed: bool
    detail: str


def variant_label(config: ExperimentConfig) -> str:
    """
    # Short label of the learning rule a config describes: 'dynamic', 'sigma=0.5' or the algorithm name
    """
    if config.algorithm != 'q_sigma':
        return config.algorithm
    if config.sigma_schedule == 'episode_decay':
        return 'dynamic'
    return f"sigma={config.sigma:g}"


def _pooled(*stderrs: float) -> float:
    return math.sqrt(sum(se * se for se in stderrs))


def _find(configs: Dict[str, ExperimentConfig], label: str, n: Optional[int] = None) -> str:
    for name, config in configs.items():
        if variant_label(config) == label and (n is None or config.n == n):
            return name
    raise KeyError(f"설정에서 '{label}' 변형을 찾을 수 없습니다 (n={n}).")


def check_randomwalk(configs: Dict[str, ExperimentConfig], stats: Dict[str, RunStatistics],
                     thresholds: Dict[str, float]) -> List[AcceptanceCheck]:
    """
    # Early RMS favours full sampling, late RMS favours pure expectation,
    # decaying sigma is at least as good as every fixed sigma at the end
    """
    episodes = min(s.episodes for s in stats.values())
    early = int(thresholds.get('early_episodes', 10))
    late_first = episodes - int(thresholds.get('late_episodes', 10)) + 1
    margin = thresholds.get('margin_stderr', 2.0)
    full, expected, dynamic = (stats[_find(configs, label)] for label in ('sigma=1', 'sigma=0', 'dynamic'))
    checks = []

    full_early, _ = full.window_average(1, early)
    expected_early, _ = expected.window_average(1, early)
    checks.append(AcceptanceCheck(
        'early_sampling_advantage', full_early < expected_early,
        f"에피소드 1-{early} RMS: sigma=1 {full_early:.4f} < sigma=0 {expected_early:.4f}"))

    full_late, _ = full.window_average(late_first, episodes)
    expected_late, _ = expected.window_average(late_first, episodes)
    checks.append(AcceptanceCheck(
        'late_expectation_advantage', expected_late < full_late,
        f"에피소드 {late_first}-{episodes} RMS: sigma=0 {expected_late:.4f} < sigma=1 {full_late:.4f}"))

    dyn_mean, dyn_se = dynamic.window_average(late_first, episodes)
    worst_gap = -math.inf
    for name, config in configs.items():
        if config.sigma_schedule == 'episode_decay':
            continue
        mean, se = stats[name].window_average(late_first, episodes)
        worst_gap = max(worst_gap, dyn_mean - (mean + margin * _pooled(se, dyn_se)))
    checks.append(AcceptanceCheck(
        'dynamic_sigma_final', worst_gap <= 0.0,
        f"동적 sigma 최종 RMS {dyn_mean:.4f}, 고정 sigma 대비 최대 초과량 {worst_gap:.4f}"))

    max_se = max(float(s.stderr.max()) for s in stats.values())
    limit = thresholds.get('max_stderr', 0.006)
    checks.append(AcceptanceCheck('stderr_bound', max_se < limit, f"최대 표준오차 {max_se:.5f} < {limit:g}"))
    return checks


def _best(sweep: pd.DataFrame) -> Tuple[float, float, float]:
    row = sweep.loc[sweep['mean'].idxmax()]
    return float(row['mean']), float(row['stderr']), float(row['alpha'])


def check_windygrid(configs: Dict[str, ExperimentConfig], sweeps: Dict[str, pd.DataFrame],
                    thresholds: Dict[str, float]) -> List[AcceptanceCheck]:
    """
    # The middle backup length beats shorter (and, when configured, longer) backups,
    # decaying sigma has the best step size overall
    """
    long_n = int(thresholds.get('long_n', 3))
    others = [int(thresholds.get('short_n', 1))]
    if 'larger_n' in thresholds:
        others.append(int(thresholds['larger_n']))
    margin = thresholds.get('margin_stderr', 2.0)
    checks = []
    for other_n in others:
        for label in ('sigma=0', 'sigma=0.5', 'sigma=1'):
            long_best = _best(sweeps[_find(configs, label, long_n)])
            other_best = _best(sweeps[_find(configs, label, other_n)])
            checks.append(AcceptanceCheck(
                f"n{long_n}_beats_n{other_n}[{label}]", long_best[0] > other_best[0],
                f"{label}: n={long_n} {long_best[0]:.3f} (alpha={long_best[2]:g}) > "
                f"n={other_n} {other_best[0]:.3f} (alpha={other_best[2]:g})"))

    ranking = sorted(((_best(sweeps[name]), variant_label(config))
                      for name, config in configs.items() if config.n == long_n), reverse=True)
    (top, top_label), (second, second_label) = ranking[0], ranking[1]
    checks.append(AcceptanceCheck(
        'dynamic_sigma_best', top_label == 'dynamic',
        f"1위 {top_label} {top[0]:.3f}, 2위 {second_label} {second[0]:.3f}"))
    half = _best(sweeps[_find(configs, 'sigma=0.5', long_n)])
    runner_up = second if top_label == 'dynamic' else top
    close = runner_up[0] - half[0] <= margin * _pooled(runner_up[1], half[1])
    checks.append(AcceptanceCheck(
        'half_sigma_second', close,
        f"sigma=0.5 {half[0]:.3f} 과 2위 {runner_up[0]:.3f}의 차이가 {margin:g} 표준오차 이내"))

    max_se = max(float(s['stderr'].max()) for s in sweeps.values())
    limit = thresholds.get('max_stderr', 0.3)
    checks.append(AcceptanceCheck('stderr_bound', max_se < limit, f"최대 표준오차 {max_se:.4f} < {limit:g}"))
    return checks


def check_mountaincliff(configs: Dict[str, ExperimentConfig], stats: Dict[str, RunStatistics],
                        thresholds: Dict[str, float]) -> List[AcceptanceCheck]:
    """
    # Ordering and level of the average return per episode on the mountain cliff
    """
    episodes = min(s.episodes for s in stats.values())
    early = min(int(thresholds.get('early_episodes', 50)), episodes)
    tolerance = thresholds.get('relative_tolerance', 0.15)
    margin = thresholds.get('margin_stderr', 2.0)
    dynamic, half, sarsa = (stats[_find(configs, label)] for label in ('dynamic', 'sigma=0.5', 'sarsa'))
    dyn_final, half_final, sarsa_final = (s.cumulative_average(episodes) for s in (dynamic, half, sarsa))
    checks = [AcceptanceCheck(
        'final_ordering', dyn_final[0] > half_final[0] > sarsa_final[0],
        f"{episodes} 에피소드 후 평균 리턴: 동적 {dyn_final[0]:.1f} > sigma=0.5 {half_final[0]:.1f} "
        f"> sarsa {sarsa_final[0]:.1f}")]

    for label, (mean, _), key in (('dynamic', dyn_final, 'dynamic_target'), ('sigma=0.5', half_final, 'half_target')):
        if key not in thresholds:
            continue
        target = thresholds[key]
        checks.append(AcceptanceCheck(
            f"final_level[{label}]", abs(mean - target) <= tolerance * abs(target),
            f"{label}: {mean:.1f}, 기준 {target:g} ±{tolerance:.0%}"))

    sarsa_early = sarsa.cumulative_average(early)
    for label, s in (('dynamic', dynamic), ('sigma=0.5', half)):
        mean, se = s.cumulative_average(early)
        gap = mean - sarsa_early[0]
        checks.append(AcceptanceCheck(
            f"early_advantage[{label}]", gap >= margin * _pooled(se, sarsa_early[1]),
            f"{early} 에피소드 후 {label} {mean:.1f} vs sarsa {sarsa_early[0]:.1f}"))
    return checks


def _variant_csv(out_dir: Optional[str], experiment: str, variant: str, suffix: str = '') -> Optional[str]:
    if not out_dir:
        return None
    return os.path.join(out_dir, f"{experiment}_{variant}{suffix}.csv")


def _summary_table(rows: List[Dict[str, object]]) -> str:
    return pd.DataFrame(rows).to_string(index=False)


def reproduce(experiment: str, workers: Optional[int] = None, runs: Optional[int] = None,
              seed: Optional[int] = None, out_dir: Optional[str] = None) -> Tuple[bool, List[AcceptanceCheck], str]:
    """
    # Run a checked-in experiment and evaluate its acceptance checks
    # experiment: one of REPRODUCTIONS
    # out_dir: directory receiving one CSV per variant (optional)
    # Returns: (all checks passed, checks, printable per-variant summary)
    """
    if experiment not in REPRODUCTIONS:
        raise ValueError(f"알 수 없는 재현 실험: {experiment} (지원: {', '.join(REPRODUCTIONS)})")
    handler = ConfigHandler(packaged_config_path(experiment))
    configs = dict(handler.experiment_configs(runs=runs, seed=seed))
    thresholds = handler.get_acceptance()
    rows = []

    if experiment == 'windygrid':
        sweeps = {}
        for name, config in configs.items():
            sweep = sweep_alpha(config, workers=workers)
            sweeps[name] = sweep
            path = _variant_csv(out_dir, experiment, name, '_sweep')
            if path:
                emit_sweep_csv(sweep, path)
            best_mean, best_se, best_alpha = _best(sweep)
            rows.append({'variant': name, 'n': config.n, 'best_alpha': best_alpha,
                         'mean': round(best_mean, 4), 'stderr': round(best_se, 4)})
        checks = check_windygrid(configs, sweeps, thresholds)
    else:
        stats = {}
        for name, config in configs.items():
            stats[name] = run_experiment(config, workers)
            path = _variant_csv(out_dir, experiment, name)
            if path:
                emit_csv(stats[name], path)
            mean, se = stats[name].overall_mean
            rows.append({'variant': name, 'n': config.n, 'alpha': round(config.alpha, 4),
                         'mean': round(mean, 4), 'stderr': round(se, 4),
                         'final': round(float(stats[name].mean[-1]), 4)})
        check: Callable = check_randomwalk if experiment == 'randomwalk' else check_mountaincliff
        checks = check(configs, stats, thresholds)

    passed = all(c.passed for c in checks)
    for c in checks:
        (logger.info if c.passed else logger.warning)(f"[{'통과' if c.passed else '실패'}] {c.name}: {c.detail}")
    return passed, checks, _summary_table(rows)
