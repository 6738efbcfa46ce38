from .core_types import ContractViolation, require_unit_interval


class SigmaSchedule:
    """
    # Rule producing the degree of sampling sigma for each time step
    # Changes only between episodes, through on_episode_end()
    """
    @property
    def value(self) -> float:
        raise NotImplementedError

    def on_episode_end(self) -> None:
        pass


class ConstantSigma(SigmaSchedule):
    def __init__(self, sigma: float):
        require_unit_interval(sigma, "sigma")
        self.sigma = float(sigma)

    @property
    def value(self) -> float:
        return self.sigma

    def __repr__(self) -> str:
        return f"ConstantSigma({self.sigma})"


class EpisodeDecaySigma(SigmaSchedule):
    """
    # sigma = initial * factor ** episode (episode counted from 0)
    """
    def __init__(self, initial: float = 1.0, factor: float = 0.95):
        require_unit_interval(initial, "sigma 초기값")
        if not (0.0 < factor <= 1.0):
            raise ContractViolation(f"sigma 감쇠 계수는 (0, 1] 범위여야 합니다: {factor}")
        self.initial = float(initial)
        self.factor = float(factor)
        self.episode = 0

    @property
    def value(self) -> float:
        return self.initial * self.factor ** self.episode

    def on_episode_end(self) -> None:
        self.episode += 1

    def __repr__(self) -> str:
        return f"EpisodeDecaySigma(initial={self.initial}, factor={self.factor}, episode={self.episode})"
