import configparser
import logging
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .agent import ALGORITHMS
from .environments import ENVIRONMENTS, make_environment

logger = logging.getLogger(__name__)

EXPERIMENT_SECTION = 'experiment'
ACCEPTANCE_SECTION = 'acceptance'
VARIANT_PREFIX = 'variant '

MEASUREMENTS = ('return_per_episode', 'rms_per_episode')
POLICIES = ('epsilon_greedy', 'equiprobable')
SIGMA_SCHEDULES = ('constant', 'episode_decay')
REQUIRED_KEYS = ('environment',)
ACCEPTANCE_KEYS = (
    'early_episodes', 'late_episodes', 'margin_stderr', 'max_stderr', 'long_n', 'short_n', 'larger_n',
    'dynamic_target', 'half_target', 'relative_tolerance',
)
# Written into files produced by create_default_config
TEMPLATE_ENVIRONMENT = 'random_walk_19'


class ConfigValidationError(ValueError):
    """
    # Raised for missing, malformed or out-of-range experiment configuration
    """


@dataclass
class ExperimentConfig:
    """
    # Declarative description of one experiment (one learning configuration, many runs)
    """
    environment: str
    algorithm: str = 'q_sigma'
    n: int = 1
    alpha: float = 0.5
    gamma: float = 1.0
    policy: str = 'epsilon_greedy'
    epsilon: float = 0.1
    sigma_schedule: str = 'constant'
    sigma: float = 1.0
    sigma_decay: float = 0.95
    episodes: int = 100
    runs: int = 100
    seed: int = 0
    measurement: str = 'return_per_episode'
    alphas: List[float] = field(default_factory=list)
    moving_average_window: int = 30
    max_episode_steps: int = 0
    output: str = ''
    name: str = 'experiment'

    def validate(self) -> 'ExperimentConfig':
        """
        # Check names and numeric ranges; returns self for chaining
        """
        def fail(message: str):
            raise ConfigValidationError(f"[{self.name}] {message}")

        if self.environment not in ENVIRONMENTS:
            fail(f"알 수 없는 환경: {self.environment} (지원: {', '.join(ENVIRONMENTS)})")
        if self.algorithm not in ALGORITHMS:
            fail(f"알 수 없는 알고리즘: {self.algorithm} (지원: {', '.join(ALGORITHMS)})")
        if self.policy not in POLICIES:
            fail(f"알 수 없는 정책: {self.policy}")
        if self.sigma_schedule not in SIGMA_SCHEDULES:
            fail(f"알 수 없는 sigma 스케줄: {self.sigma_schedule}")
        if self.measurement not in MEASUREMENTS:
            fail(f"알 수 없는 측정 방식: {self.measurement}")
        for alpha in [self.alpha] + list(self.alphas):
            if not (0.0 < alpha <= 1.0):
                fail(f"alpha 값은 (0, 1] 범위여야 합니다: {alpha}")
        for key in ('epsilon', 'sigma', 'gamma'):
            value = getattr(self, key)
            if not (0.0 <= value <= 1.0):
                fail(f"{key} 값은 [0, 1] 범위여야 합니다: {value}")
        if not (0.0 < self.sigma_decay <= 1.0):
            fail(f"sigma_decay 값은 (0, 1] 범위여야 합니다: {self.sigma_decay}")
        for key in ('n', 'episodes', 'runs', 'moving_average_window'):
            if getattr(self, key) < 1:
                fail(f"{key} 값은 1 이상이어야 합니다: {getattr(self, key)}")
        if self.max_episode_steps < 0:
            fail(f"max_episode_steps 값은 0 이상이어야 합니다: {self.max_episode_steps}")
        env = make_environment(self.environment)
        if self.gamma == 1.0 and not env.episodic:
            fail(f"gamma = 1은 에피소드형 환경에서만 허용됩니다: {self.environment}")
        if self.measurement == 'rms_per_episode' and not hasattr(env, 'true_values'):
            fail(f"{self.environment} 환경은 RMS 측정을 지원하지 않습니다.")
        return self


def _parse_number(text: str) -> float:
    # Fractions such as 1/6 are accepted
    return float(Fraction(text.strip()))


class ConfigHandler:
    """
    # Configuration handler for experiment INI files
    # [experiment] holds the base config, [variant NAME] sections override it,
    # [acceptance] holds numeric thresholds for reproduce checks
    """
    def __init__(self, config_file: str = None):
        """
        # Initialize configuration handler
        # config_file: Path to INI configuration file (optional)
        """
        self.config_file = config_file
        self.config = configparser.ConfigParser(interpolation=None)
        self._set_defaults()

        if config_file:
            self.load_config(config_file)
            logger.info(f"설정 파일 로드 완료: {config_file}")
        else:
            logger.info("기본 설정 사용")

    def _set_defaults(self):
        """
        # Set default configuration values
        """
        self.config[EXPERIMENT_SECTION] = {
            'algorithm': 'q_sigma',              # sarsa, expected_sarsa, tree_backup, q_learning, q_sigma
            'n': '1',                            # Backup length
            'alpha': '0.5',                      # Step size (fractions like 1/6 allowed)
            'alphas': '',                        # Alpha sweep list (comma-separated)
            'gamma': '1.0',                      # Discount factor
            'policy': 'epsilon_greedy',          # epsilon_greedy or equiprobable
            'epsilon': '0.1',                    # Exploration rate
            'sigma_schedule': 'constant',        # constant or episode_decay
            'sigma': '1.0',                      # Constant sigma or decay initial value
            'sigma_decay': '0.95',               # Per-episode sigma decay factor
            'episodes': '100',                   # Episodes per run
            'runs': '100',                       # Independent runs
            'seed': '0',                         # Base seed; run i uses seed + i
            'measurement': 'return_per_episode',  # return_per_episode or rms_per_episode
            'moving_average_window': '30',       # Right-centred moving average width
            'max_episode_steps': '0',            # Episode step cap (0 = unlimited)
            'output': '',                        # CSV output path
        }

    @property
    def allowed_keys(self) -> List[str]:
        return list(REQUIRED_KEYS) + list(self.config[EXPERIMENT_SECTION].keys())

    def load_config(self, config_file: str) -> bool:
        """
        # Load configuration from file and check for unknown keys
        # config_file: Path to INI configuration file
        """
        if not os.path.exists(config_file):
            logger.error(f"설정 파일을 찾을 수 없음: {config_file}")
            raise ConfigValidationError(f"설정 파일을 찾을 수 없음: {config_file}")
        allowed = set(self.allowed_keys)
        try:
            self.config.read(config_file, encoding='utf-8')
        except configparser.Error as e:
            raise ConfigValidationError(f"설정 파일 파싱 오류: {config_file}: {e}") from e
        for section in self.config.sections():
            if section == ACCEPTANCE_SECTION:
                unknown = set(self.config[section].keys()) - set(ACCEPTANCE_KEYS)
                if unknown:
                    raise ConfigValidationError(
                        f"알 수 없는 수용 기준 키: {', '.join(sorted(unknown))} (섹션 [{section}], {config_file})")
                continue
            if section != EXPERIMENT_SECTION and not section.startswith(VARIANT_PREFIX):
                raise ConfigValidationError(f"알 수 없는 섹션: [{section}] ({config_file})")
            unknown = set(self.config[section].keys()) - allowed
            if unknown:
                raise ConfigValidationError(
                    f"알 수 없는 설정 키: {', '.join(sorted(unknown))} (섹션 [{section}], {config_file})")
        self.config_file = config_file
        return True

    def save_config(self, config_file: str = None) -> bool:
        """
        # Save current configuration to file
        # config_file: Path to save configuration (default: original file)
        """
        config_file = config_file or self.config_file
        if not config_file:
            logger.warning("저장할 설정 파일 경로가 지정되지 않았습니다.")
            return False
        try:
            os.makedirs(os.path.dirname(os.path.abspath(config_file)), exist_ok=True)
            with open(config_file, 'w', encoding='utf-8') as f:
                self.config.write(f)
            logger.info(f"설정 파일 저장 완료: {config_file}")
            return True
        except OSError as e:
            logger.error(f"설정 파일 저장 중 오류 발생: {e}")
            return False

    def create_default_config(self, config_file: str) -> bool:
        """
        # Create a default configuration file if it doesn't exist
        """
        if os.path.exists(config_file):
            logger.warning(f"설정 파일이 이미 존재합니다: {config_file}")
            return False
        self.config[EXPERIMENT_SECTION].setdefault('environment', TEMPLATE_ENVIRONMENT)
        return self.save_config(config_file)

    def variant_names(self) -> List[str]:
        return [s[len(VARIANT_PREFIX):].strip() for s in self.config.sections() if s.startswith(VARIANT_PREFIX)]

    def _merged(self, variant: Optional[str]) -> Dict[str, str]:
        values = dict(self.config[EXPERIMENT_SECTION])
        if variant is not None:
            values.update(self.config[VARIANT_PREFIX + variant])
        return values

    def get_acceptance(self) -> Dict[str, float]:
        """
        # Numeric thresholds of the [acceptance] section
        """
        if not self.config.has_section(ACCEPTANCE_SECTION):
            return {}
        try:
            return {key: _parse_number(value) for key, value in self.config[ACCEPTANCE_SECTION].items()}
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigValidationError(f"[acceptance] 값 변환 실패: {e}") from e

    def build_config(self, variant: Optional[str] = None) -> ExperimentConfig:
        """
        # ExperimentConfig for the base section or a named variant
        """
        values = self._merged(variant)
        name = variant or (os.path.splitext(os.path.basename(self.config_file))[0] if self.config_file else 'experiment')
        missing = [key for key in REQUIRED_KEYS if not values.get(key, '').strip()]
        if missing:
            raise ConfigValidationError(
                f"[{name}] 필수 설정 키 누락: {', '.join(missing)} ({self.config_file or '기본 설정'})")
        try:
            alphas = [_parse_number(a) for a in values['alphas'].split(',') if a.strip()]
            config = ExperimentConfig(
                environment=values['environment'].strip(),
                algorithm=values['algorithm'].strip(),
                n=int(values['n']),
                alpha=_parse_number(values['alpha']),
                gamma=_parse_number(values['gamma']),
                policy=values['policy'].strip(),
                epsilon=_parse_number(values['epsilon']),
                sigma_schedule=values['sigma_schedule'].strip(),
                sigma=_parse_number(values['sigma']),
                sigma_decay=_parse_number(values['sigma_decay']),
                episodes=int(values['episodes']),
                runs=int(values['runs']),
                seed=int(values['seed']),
                measurement=values['measurement'].strip(),
                alphas=alphas,
                moving_average_window=int(values['moving_average_window']),
                max_episode_steps=int(values['max_episode_steps']),
                output=values['output'].strip(),
                name=name,
            )
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigValidationError(f"[{name}] 설정 값 변환 실패: {e}") from e
        return config.validate()

    def experiment_configs(self, **overrides) -> List[Tuple[str, ExperimentConfig]]:
        """
        # All (name, config) pairs of the file: one per variant, or the base config alone
        # overrides: field values replacing the file's (None values are ignored)
        """
        overrides = {k: v for k, v in overrides.items() if v is not None}
        variants = self.variant_names()
        configs = [self.build_config(v) for v in variants] if variants else [self.build_config()]
        return [(c.name, replace(c, **overrides).validate()) for c in configs]


def packaged_config_path(name: str) -> str:
    """
    # Path of a checked-in config under qsigma_manager/configs
    """
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), 'configs', f"{name}.ini")
