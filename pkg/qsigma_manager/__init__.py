"""
Q(σ) Experiment Manager - 다단계 시간차 제어 알고리즘 실험 도구

이 패키지는 Sarsa, Expected Sarsa, Q-learning, Tree-backup을 하나의 σ 매개변수로
통합하는 Q(σ) 알고리즘과, 시드 고정 다중 실행 실험 및 통계 집계 도구를 제공합니다.
"""

__version__ = '0.1.0'
