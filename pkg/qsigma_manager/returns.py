"""
TD errors, n-step returns and importance-sampling ratios.

Everything here is a pure function of its inputs. The n-step returns take a
TrajectorySegment and compute the closed-form sums directly, which makes them the
reference for the agent's incremental G/E/rho recursion.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .action_values import ActionValues
from .core_types import ContractViolation, StateRef, require_unit_interval
from .policy import PolicyModel


def expected_action_value(q: ActionValues, policy: PolicyModel, state: StateRef) -> float:
    """
    # V(s) = sum_a pi(a|s) Q(s, a); exactly 0 at a terminal state
    """
    if state.terminal:
        return 0.0
    return float(np.dot(policy.probabilities(state), q.values(state)))


def td_error_sarsa(r: float, gamma: float, q_next: float, q_cur: float) -> float:
    return r + gamma * q_next - q_cur


def td_error_expected_sarsa(r: float, gamma: float, v_next: float, q_cur: float) -> float:
    return r + gamma * v_next - q_cur


def td_error_q_learning(r: float, gamma: float, q_next_row: Optional[Sequence[float]], q_cur: float) -> float:
    """
    # q_next_row is None (or empty) when the next state is terminal
    """
    if q_next_row is None or len(q_next_row) == 0:
        return r - q_cur
    return r + gamma * float(np.max(q_next_row)) - q_cur


def td_error_sigma(r: float, gamma: float, sigma: float, q_next_sampled: float,
                   v_next: float, q_cur: float) -> float:
    """
    # Blend of the Sarsa and Expected Sarsa TD errors weighted by sigma
    # Pass q_next_sampled = v_next = 0 for a terminal next state
    """
    require_unit_interval(sigma, "sigma")
    return r + gamma * (sigma * q_next_sampled + (1.0 - sigma) * v_next) - q_cur


@dataclass(frozen=True)
class SegmentStep:
    """
    # Quantities stored for step k of a trajectory
    # q_current: snapshot of Q(S_k, A_k) taken when A_k was selected
    # q_next, v_next: Q(S_k+1, A_k+1) and V(S_k+1) at the time of the step (0 when terminal)
    # sigma_next, pi_next, mu_next: sigma_k+1, pi(A_k+1|S_k+1), mu(A_k+1|S_k+1)
    """
    reward: float
    q_current: float
    q_next: float = 0.0
    v_next: float = 0.0
    sigma_next: float = 1.0
    pi_next: float = 1.0
    mu_next: float = 1.0
    terminal: bool = False


@dataclass
class TrajectorySegment:
    """
    # Steps t .. tau of one backup, tau = min(t + n - 1, T - 1)
    # q_start: current Q(S_t, A_t) at update time (defaults to the first snapshot)
    """
    steps: Sequence[SegmentStep]
    gamma: float
    q_start: Optional[float] = None

    def __post_init__(self):
        if len(self.steps) == 0:
            raise ContractViolation("빈 궤적 구간입니다.")
        if not (0.0 <= self.gamma <= 1.0):
            raise ContractViolation(f"gamma 값은 [0, 1] 범위여야 합니다: {self.gamma}")
        for step in self.steps[:-1]:
            if step.terminal:
                raise ContractViolation("종료 전이는 구간의 마지막 단계에서만 허용됩니다.")
        if self.q_start is None:
            self.q_start = self.steps[0].q_current

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def terminated(self) -> bool:
        return self.steps[-1].terminal


def _discounted_rewards(seg: TrajectorySegment) -> float:
    total = 0.0
    discount = 1.0
    for step in seg.steps:
        total += discount * step.reward
        discount *= seg.gamma
    return total


def nstep_return_sarsa(seg: TrajectorySegment) -> float:
    """
    # sum_k gamma^k R_t+k+1 + gamma^n Q(S_t+n, A_t+n), no bootstrap after termination
    """
    g = _discounted_rewards(seg)
    if not seg.terminated:
        g += seg.gamma ** len(seg) * seg.steps[-1].q_next
    return g


def nstep_return_expected_sarsa(seg: TrajectorySegment) -> float:
    """
    # As n-step Sarsa but the last state is backed up by its expected action value
    """
    g = _discounted_rewards(seg)
    if not seg.terminated:
        g += seg.gamma ** len(seg) * seg.steps[-1].v_next
    return g


def _step_delta(step: SegmentStep, gamma: float, sigma: float) -> float:
    if step.terminal:
        return td_error_sigma(step.reward, gamma, sigma, 0.0, 0.0, step.q_current)
    return td_error_sigma(step.reward, gamma, sigma, step.q_next, step.v_next, step.q_current)


def nstep_return_tree_backup(seg: TrajectorySegment) -> float:
    """
    # Q(S_t, A_t) + sum_k delta^ES_k prod_{i=t+1..k} gamma pi(A_i|S_i)
    """
    g = seg.q_start
    weight = 1.0
    for k, step in enumerate(seg.steps):
        if k > 0:
            weight *= seg.gamma * seg.steps[k - 1].pi_next
        v_next = 0.0 if step.terminal else step.v_next
        g += weight * td_error_expected_sarsa(step.reward, seg.gamma, v_next, step.q_current)
    return g


def nstep_return_q_sigma(seg: TrajectorySegment) -> float:
    """
    # Q(S_t, A_t) + sum_k delta^sigma_k prod_{i=t+1..k} gamma [(1 - sigma_i) pi(A_i|S_i) + sigma_i]
    """
    g = seg.q_start
    weight = 1.0
    for k, step in enumerate(seg.steps):
        if k > 0:
            prev = seg.steps[k - 1]
            weight *= seg.gamma * ((1.0 - prev.sigma_next) * prev.pi_next + prev.sigma_next)
        g += weight * _step_delta(step, seg.gamma, step.sigma_next)
    return g


def _ratio(step: SegmentStep) -> float:
    if step.mu_next <= 0.0:
        raise ContractViolation("행동 정책 확률이 0인 행동이 기록되었습니다 (잘못된 off-policy 데이터).")
    return step.pi_next / step.mu_next


def importance_ratio(seg: TrajectorySegment) -> float:
    """
    # prod_{k=t+1..tau} pi(A_k|S_k) / mu(A_k|S_k); on-policy data gives exactly 1
    """
    rho = 1.0
    for step in seg.steps[:-1]:
        rho *= _ratio(step)
    return rho


def importance_ratio_sigma(seg: TrajectorySegment) -> float:
    """
    # prod_{k=t+1..tau} (sigma_k pi/mu + 1 - sigma_k)
    """
    rho = 1.0
    for step in seg.steps[:-1]:
        rho *= 1.0 - step.sigma_next + step.sigma_next * _ratio(step)
    return rho
