import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .action_values import ActionValues
from .core_types import ActionId, ContractViolation, RngStream, StateRef, require_unit_interval
from .policy import GreedyPolicy, PolicyModel
from .returns import (
    SegmentStep,
    TrajectorySegment,
    expected_action_value,
    td_error_sigma,
)
from .sigma_schedule import ConstantSigma, SigmaSchedule

logger = logging.getLogger(__name__)

ALGORITHMS = ('sarsa', 'expected_sarsa', 'tree_backup', 'q_learning', 'q_sigma')


@dataclass
class TransitionRecord:
    """
    # Per-step storage of the n-step Q(sigma) loop
    # state/action/q_snapshot/sigma/pi_prob/mu_prob/rho describe (S_k, A_k) when A_k was selected;
    # reward/q_next/v_next/delta_sigma/terminal_next are filled in once S_k+1 is observed
    """
    state: StateRef
    action: ActionId
    q_snapshot: float
    sigma: float
    pi_prob: float
    mu_prob: float
    rho: float
    reward: float = 0.0
    q_next: float = 0.0
    v_next: float = 0.0
    delta_sigma: float = 0.0
    terminal_next: bool = False


def _update_step(alpha: float, rho: float, g: float, q_cur: float) -> float:
    return alpha * rho * (g - q_cur)


class QSigmaAgent:
    """
    # Online n-step Q(sigma) control learner
    # behavior: policy generating actions (mu); target: policy being learned about (pi)
    # final_sigma: when set, the last step of every full-length backup uses this sigma
    #              instead of the scheduled one (n-step Expected Sarsa uses 0)
    """
    def __init__(self, q: ActionValues, behavior: PolicyModel, target: PolicyModel, n: int,
                 alpha: float, gamma: float, sigma_schedule: SigmaSchedule,
                 final_sigma: Optional[float] = None, name: str = 'q_sigma'):
        if n < 1:
            raise ContractViolation(f"백업 길이 n은 1 이상이어야 합니다: {n}")
        if not (0.0 < alpha <= 1.0):
            raise ContractViolation(f"alpha 값은 (0, 1] 범위여야 합니다: {alpha}")
        require_unit_interval(gamma, "gamma")
        if final_sigma is not None:
            require_unit_interval(final_sigma, "final_sigma")
        self.q = q
        self.behavior = behavior
        self.target = target
        self.n = n
        self.alpha = alpha
        self.gamma = gamma
        self.sigma_schedule = sigma_schedule
        self.final_sigma = final_sigma
        self.name = name
        self.buffer: List[Optional[TransitionRecord]] = [None] * (n + 1)
        self.t = 0
        self.T = math.inf
        self.active = False
        self.updates_applied = 0

    def _record(self, k: int) -> TransitionRecord:
        record = self.buffer[k % (self.n + 1)]
        if record is None:
            raise RuntimeError(f"시간 {k}의 전이 기록이 버퍼에 없습니다.")
        return record

    def _store(self, k: int, state: StateRef, rng: RngStream) -> Tuple[TransitionRecord, float]:
        """
        # Select A_k in S_k from the behavior policy and store its record
        # Q(S_k, .), mu(.|S_k) and pi(.|S_k) are computed once and shared by sampling,
        # the stored probabilities and the returned V(S_k)
        """
        q_row = self.q.values(state)
        mu = self.behavior.probabilities_given(state, self.q, q_row)
        pi = mu if self.target is self.behavior else self.target.probabilities_given(state, self.q, q_row)
        action = rng.choice(mu)
        record = TransitionRecord(
            state=state,
            action=action,
            q_snapshot=float(q_row[action]),
            sigma=self.sigma_schedule.value,
            pi_prob=float(pi[action]),
            mu_prob=float(mu[action]),
            rho=float(pi[action] / mu[action]),
        )
        self.buffer[k % (self.n + 1)] = record
        return record, float(np.dot(pi, q_row))

    def begin_episode(self, s0: StateRef, rng: RngStream) -> ActionId:
        """
        # Select A_0 from the behavior policy and store (S_0, A_0, Q(S_0, A_0))
        """
        if s0.terminal:
            raise ContractViolation("시작 상태가 종료 상태입니다.")
        if self.active or any(record is not None for record in self.buffer):
            raise ContractViolation("이전 에피소드가 정리되지 않았습니다 (버퍼가 비어 있지 않음).")
        self.t = 0
        self.T = math.inf
        self.active = True
        record, _ = self._store(0, s0, rng)
        return record.action

    def step(self, r: float, s_next: StateRef, rng: RngStream) -> Optional[ActionId]:
        """
        # Observe R_t+1 and S_t+1 for the pending action A_t
        # Returns A_t+1, or None when S_t+1 is terminal
        """
        if not self.active:
            raise ContractViolation("begin_episode 호출 전에 step이 호출되었습니다.")
        if self.T != math.inf:
            raise ContractViolation("종료 상태 이후에는 step을 호출할 수 없습니다.")
        if not math.isfinite(r):
            raise ContractViolation(f"보상이 유한하지 않습니다: {r}")

        current = self._record(self.t)
        current.reward = r
        a_next = None
        if s_next.terminal:
            current.terminal_next = True
            current.delta_sigma = td_error_sigma(r, self.gamma, 1.0, 0.0, 0.0, current.q_snapshot)
            self.T = self.t + 1
        else:
            stored, current.v_next = self._store(self.t + 1, s_next, rng)
            a_next = stored.action
            current.q_next = stored.q_snapshot
            current.delta_sigma = td_error_sigma(
                r, self.gamma, stored.sigma, current.q_next, current.v_next, current.q_snapshot)

        tau = self.t - self.n + 1
        self.t += 1
        if tau >= 0:
            self.apply_nstep_update(tau)
        return a_next

    def _window_end(self, tau: int) -> int:
        return int(min(tau + self.n - 1, self.T - 1))

    def _effective_delta(self, tau: int, k: int, record: TransitionRecord) -> float:
        if self.final_sigma is not None and k == tau + self.n - 1 and not record.terminal_next:
            return td_error_sigma(record.reward, self.gamma, self.final_sigma,
                                  record.q_next, record.v_next, record.q_snapshot)
        return record.delta_sigma

    def apply_nstep_update(self, tau: int) -> Tuple[float, float]:
        """
        # Incremental G/E/rho recursion for the backup starting at time tau
        # Returns the (G, rho) pair that was applied
        """
        last = self._window_end(tau)
        if last < tau:
            raise RuntimeError(f"갱신 구간이 비어 있습니다: tau={tau}")
        head = self._record(tau)
        q_cur = self.q.value(head.state, head.action)
        rho = 1.0
        e = 1.0
        g = q_cur
        for k in range(tau, last + 1):
            record = self._record(k)
            g = g + e * self._effective_delta(tau, k, record)
            if k < last:
                nxt = self._record(k + 1)
                e = self.gamma * e * ((1.0 - nxt.sigma) * nxt.pi_prob + nxt.sigma)
                rho = rho * (1.0 - nxt.sigma + nxt.sigma * nxt.rho)
        self.q.apply_delta(head.state, head.action, _update_step(self.alpha, rho, g, q_cur))
        self.updates_applied += 1
        return g, rho

    def segment(self, tau: int) -> TrajectorySegment:
        """
        # Stored records tau .. min(tau + n - 1, T - 1) as a TrajectorySegment
        """
        last = self._window_end(tau)
        steps = []
        for k in range(tau, last + 1):
            record = self._record(k)
            if record.terminal_next:
                steps.append(SegmentStep(reward=record.reward, q_current=record.q_snapshot, terminal=True))
                continue
            nxt = self._record(k + 1)
            sigma_next = nxt.sigma
            if self.final_sigma is not None and k == tau + self.n - 1:
                sigma_next = self.final_sigma
            steps.append(SegmentStep(
                reward=record.reward,
                q_current=record.q_snapshot,
                q_next=record.q_next,
                v_next=record.v_next,
                sigma_next=sigma_next,
                pi_next=nxt.pi_prob,
                mu_next=nxt.mu_prob,
            ))
        head = self._record(tau)
        return TrajectorySegment(steps, self.gamma, q_start=self.q.value(head.state, head.action))

    def truncate_episode(self) -> None:
        """
        # End the episode at the current time without observing a terminal state
        """
        if not self.active:
            raise ContractViolation("진행 중인 에피소드가 없습니다.")
        if self.T == math.inf:
            self.T = self.t

    def finish_episode(self) -> None:
        """
        # Apply the remaining updates tau = T-n+1 .. T-1, clear the buffer and advance sigma
        """
        if self.T == math.inf:
            raise ContractViolation("종료 상태가 관측되기 전에는 에피소드를 마칠 수 없습니다.")
        T = int(self.T)
        for tau in range(max(T - self.n + 1, 0), T):
            self.apply_nstep_update(tau)
        self.buffer = [None] * (self.n + 1)
        self.active = False
        self.t = 0
        self.T = math.inf
        self.sigma_schedule.on_episode_end()


def one_step_q_sigma_update(q: ActionValues, s: StateRef, a: ActionId, r: float, s_next: StateRef,
                            a_next: Optional[ActionId], sigma: float, alpha: float, gamma: float,
                            target: PolicyModel) -> None:
    """
    # Q(s,a) <- Q(s,a) + alpha [r + gamma (sigma Q(s',a') + (1 - sigma) V(s')) - Q(s,a)]
    # Both bootstrap terms are 0 when s_next is terminal
    """
    require_unit_interval(sigma, "sigma")
    require_unit_interval(gamma, "gamma")
    if not (0.0 < alpha <= 1.0):
        raise ContractViolation(f"alpha 값은 (0, 1] 범위여야 합니다: {alpha}")
    q_cur = q.value(s, a)
    if s_next.terminal:
        delta = td_error_sigma(r, gamma, 1.0, 0.0, 0.0, q_cur)
    else:
        if a_next is None:
            raise ContractViolation("비종료 다음 상태에는 다음 행동이 필요합니다.")
        delta = td_error_sigma(r, gamma, sigma, q.value(s_next, a_next),
                               expected_action_value(q, target, s_next), q_cur)
    g = q_cur + 1.0 * delta
    q.apply_delta(s, a, _update_step(alpha, 1.0, g, q_cur))


def make_algorithm(name: str, q: ActionValues, behavior: PolicyModel, n: int, alpha: float,
                   gamma: float, target: Optional[PolicyModel] = None,
                   sigma_schedule: Optional[SigmaSchedule] = None) -> QSigmaAgent:
    """
    # Build a QSigmaAgent configured as one of the named special cases
    # target defaults to the behavior policy (on-policy); q_learning always uses a greedy target
    """
    if name not in ALGORITHMS:
        raise ContractViolation(f"알 수 없는 알고리즘: {name} (지원: {', '.join(ALGORITHMS)})")
    target = target if target is not None else behavior
    final_sigma = None
    if name == 'sarsa':
        schedule = ConstantSigma(1.0)
    elif name == 'tree_backup':
        schedule = ConstantSigma(0.0)
    elif name == 'expected_sarsa':
        schedule = ConstantSigma(1.0)
        final_sigma = 0.0
    elif name == 'q_learning':
        schedule = ConstantSigma(0.0)
        target = GreedyPolicy(q)
    else:
        if sigma_schedule is None:
            raise ContractViolation("q_sigma 알고리즘에는 sigma 스케줄이 필요합니다.")
        schedule = sigma_schedule
    logger.debug(f"에이전트 생성: {name}, n={n}, alpha={alpha}, gamma={gamma}, sigma={schedule!r}")
    return QSigmaAgent(q, behavior, target, n, alpha, gamma, schedule, final_sigma=final_sigma, name=name)
