import pytest

from qsigma_manager.config_handler import (
    ConfigHandler,
    ConfigValidationError,
    ExperimentConfig,
    packaged_config_path,
)


def write(tmp_path, text, name='experiment.ini'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return str(path)


def test_defaults_fill_optional_keys(tmp_path):
    path = write(tmp_path, "[experiment]\nenvironment = random_walk_19\n")
    config = ConfigHandler(path).build_config()
    assert config.environment == 'random_walk_19'
    assert (config.algorithm, config.n, config.alpha) == ('q_sigma', 1, 0.5)
    assert config.moving_average_window == 30
    assert config.alphas == []


def test_fractions_and_lists(tmp_path):
    path = write(tmp_path, "[experiment]\nenvironment = mountain_cliff\nalpha = 1/6\nalphas = 1/8, 0.25\n")
    config = ConfigHandler(path).build_config()
    assert config.alpha == pytest.approx(1 / 6)
    assert config.alphas == pytest.approx([0.125, 0.25])
    assert config.name == 'experiment'


def test_variants_override_base(tmp_path):
    path = write(tmp_path, "[experiment]\nenvironment = windy_gridworld\nn = 3\n\n"
                           "[variant a]\nsigma = 0\n\n[variant b]\nsigma = 1\nn = 1\n")
    configs = dict(ConfigHandler(path).experiment_configs())
    assert list(configs) == ['a', 'b']
    assert (configs['a'].sigma, configs['a'].n) == (0.0, 3)
    assert (configs['b'].sigma, configs['b'].n) == (1.0, 1)


def test_overrides_replace_file_values(tmp_path):
    path = write(tmp_path, "[experiment]\nenvironment = windy_gridworld\nruns = 50\nseed = 1\n")
    [(_, config)] = ConfigHandler(path).experiment_configs(runs=3, seed=None)
    assert (config.runs, config.seed) == (3, 1)


def test_missing_file_names_the_path(tmp_path):
    missing = str(tmp_path / 'nope.ini')
    with pytest.raises(ConfigValidationError, match='nope.ini'):
        ConfigHandler(missing)


def test_unknown_key_rejected(tmp_path):
    path = write(tmp_path, "[experiment]\nenvironment = windy_gridworld\nalpah = 0.5\n")
    with pytest.raises(ConfigValidationError, match='alpah'):
        ConfigHandler(path)


def test_unknown_section_rejected(tmp_path):
    path = write(tmp_path, "[experiment]\nenvironment = windy_gridworld\n[extra]\nx = 1\n")
    with pytest.raises(ConfigValidationError):
        ConfigHandler(path)


@pytest.mark.parametrize('line', [
    'alpha = 0', 'alpha = 1.5', 'epsilon = -0.1', 'sigma = 2', 'gamma = 1.2', 'n = 0',
    'runs = 0', 'sigma_decay = 0', 'environment = cartpole', 'algorithm = dqn', 'policy = softmax',
    'measurement = rms_per_episode', 'alpha = abc',
])
def test_invalid_values(tmp_path, line):
    path = write(tmp_path, f"[experiment]\nenvironment = windy_gridworld\n{line}\n")
    with pytest.raises(ConfigValidationError):
        ConfigHandler(path).build_config()


def test_acceptance_section(tmp_path):
    path = write(tmp_path, "[experiment]\nenvironment = windy_gridworld\n[acceptance]\nmax_stderr = 0.3\n")
    assert ConfigHandler(path).get_acceptance() == {'max_stderr': 0.3}


def test_environment_is_required(tmp_path):
    path = write(tmp_path, "[experiment]\nalgorithm = sarsa\nn = 2\n")
    with pytest.raises(ConfigValidationError, match='environment'):
        ConfigHandler(path).build_config()
    with pytest.raises(ConfigValidationError, match='environment'):
        ConfigHandler().build_config()


def test_environment_may_come_from_variants(tmp_path):
    path = write(tmp_path, "[experiment]\nalgorithm = sarsa\n\n[variant a]\nenvironment = windy_gridworld\n")
    assert dict(ConfigHandler(path).experiment_configs())['a'].environment == 'windy_gridworld'


def test_unknown_acceptance_key_rejected(tmp_path):
    path = write(tmp_path, "[experiment]\nenvironment = windy_gridworld\n[acceptance]\nmax_stder = 0.3\n")
    with pytest.raises(ConfigValidationError, match='max_stder'):
        ConfigHandler(path)


def test_create_default_config(tmp_path):
    path = str(tmp_path / 'sub' / 'default.ini')
    assert ConfigHandler().create_default_config(path)
    assert not ConfigHandler().create_default_config(path)
    assert ConfigHandler(path).build_config().environment == 'random_walk_19'


def test_validate_directly():
    with pytest.raises(ConfigValidationError):
        ExperimentConfig(environment='random_walk_19', alphas=[0.5, 0.0]).validate()


@pytest.mark.parametrize('name,variants', [
    ('randomwalk', 6), ('windygrid', 12), ('mountaincliff', 4), ('default', 1),
])
def test_packaged_configs_load(name, variants):
    handler = ConfigHandler(packaged_config_path(name))
    assert len(handler.experiment_configs()) == variants


def test_mountaincliff_parameters():
    configs = dict(ConfigHandler(packaged_config_path('mountaincliff')).experiment_configs())
    assert configs['dynamic'].alpha == pytest.approx(1 / 7) and configs['dynamic'].n == 8
    assert configs['sigma_0.5'].alpha == pytest.approx(0.25) and configs['sigma_0.5'].n == 4
    assert configs['sarsa'].algorithm == 'sarsa' and configs['sarsa'].alpha == pytest.approx(1 / 6)
