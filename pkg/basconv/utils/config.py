import dataclasses
import logging
import os
from dataclasses import dataclass
from typing import Optional

from hydra import compose, initialize_config_dir
from omegaconf import OmegaConf

from basconv.utils.errors import ConfigurationError
from basconv.utils.utils import sha256_hex

logger = logging.getLogger(__name__)

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_DIR = os.path.join(ROOT, 'configs')
ENV_PREFIX = 'BASCONV_'

# keys describing where a run happens, not what it computes
RUN_LOCATION_KEYS = ('out_dir', 'threads', 'ckpt_path', 'resume_from', 'use_wandb')

LEARNING_RATE_GRID = (1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3)
ACTIVATIONS = ('sigmoid', 'leaky_relu')
PRECEDENCES = ('hadamard_first', 'transform_first')


def env_overrides(environ):
    """
    Translate BASCONV_* variables into dotlist overrides.
    BASCONV_METHOD__NUM_LAYERS=2 -> method.num_layers=2
    """
    overrides = []
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower().replace('__', '.')
        if key:
            overrides.append(f'{key}={environ[name]}')
    return overrides


def _split_method_choice(overrides):
    method, values = None, []
    for item in overrides:
        key, sep, value = item.partition('=')
        if not sep:
            raise ConfigurationError(f'Override must look like key=value, got: {item}')
        if key.strip() == 'method':
            method = value.strip()
        else:
            values.append(item)
    return method, values


def compose_config(overrides=(), config_file=None, environ=None, flags=None):
    """
    Compose the run config.
    Layering, last wins: packaged defaults, config file, BASCONV_* env, flags, overrides.
    A string `method` in any layer selects the method config group.
    """
    environ = os.environ if environ is None else environ
    file_cfg = OmegaConf.create()
    if config_file is not None:
        if not os.path.exists(config_file):
            raise ConfigurationError(f'Config file does not exist: {config_file}')
        file_cfg = OmegaConf.load(config_file)

    method = None
    if isinstance(file_cfg.get('method'), str):
        method = file_cfg.pop('method')
    env_method, env_values = _split_method_choice(env_overrides(environ))
    cli_method, cli_values = _split_method_choice(list(overrides))
    method = cli_method or env_method or method

    with initialize_config_dir(config_dir=CONFIG_DIR, version_base=None):
        cfg = compose(config_name='config', overrides=[f'method={method}'] if method else [])

    OmegaConf.set_struct(cfg, False)  # Open the struct
    layers = [file_cfg, OmegaConf.from_dotlist(env_values)]
    if flags:
        layers.append(OmegaConf.create({k: v for k, v in flags.items() if v is not None}))
    layers.append(OmegaConf.from_dotlist(cli_values))
    cfg = OmegaConf.merge(cfg, *layers)
    return cfg


def default_config_yaml():
    with initialize_config_dir(config_dir=CONFIG_DIR, version_base=None):
        cfg = compose(config_name='config')
    return OmegaConf.to_yaml(cfg)


def config_hash(cfg):
    container = OmegaConf.to_container(cfg, resolve=True)
    for key in RUN_LOCATION_KEYS:
        container.pop(key, None)
    return sha256_hex(OmegaConf.to_yaml(OmegaConf.create(container), sort_keys=True))


def save_config_as_txt(cfg, out_dir):
    """
    Save the resolved YAML configuration next to the run outputs.
    """
    os.makedirs(out_dir, exist_ok=True)
    txt_path = os.path.join(out_dir, 'config.yaml')
    with open(txt_path, 'w') as f:
        f.write(OmegaConf.to_yaml(cfg, resolve=True))
    return txt_path


def check_learning_rate(learning_rate):
    if not any(abs(learning_rate - lr) <= 1e-12 for lr in LEARNING_RATE_GRID):
        logger.warning('Learning rate %g is outside the grid %s', learning_rate, list(LEARNING_RATE_GRID))
        return False
    return True


@dataclass(frozen=True)
class TrainConfig:
    model_name: str = 'basconv'
    embedding_dim: int = 64
    num_layers: int = 3
    activation: str = 'sigmoid'
    use_bias: Optional[bool] = None
    precedence: str = 'hadamard_first'
    learning_rate: float = 5e-4
    lambda_reg: float = 1e-5
    batch_size: int = 1024
    max_epochs: int = 200
    patience: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 42
    k: int = 100
    eval_batch_size: int = 256
    deterministic: bool = True
    use_wandb: bool = False
    exp_name: str = 'basconv'

    def __post_init__(self):
        if self.embedding_dim < 1:
            raise ConfigurationError(f'embedding_dim must be >= 1, got {self.embedding_dim}')
        if self.num_layers < 0:
            raise ConfigurationError(f'num_layers must be >= 0, got {self.num_layers}')
        if self.model_name == 'basconv' and self.num_layers < 1:
            raise ConfigurationError('BasConv needs at least one layer')
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f'activation must be one of {ACTIVATIONS}, got {self.activation}')
        if self.precedence not in PRECEDENCES:
            raise ConfigurationError(f'precedence must be one of {PRECEDENCES}, got {self.precedence}')
        if self.learning_rate <= 0:
            raise ConfigurationError(f'learning_rate must be positive, got {self.learning_rate}')
        if self.lambda_reg < 0:
            raise ConfigurationError(f'lambda_reg must be >= 0, got {self.lambda_reg}')
        if self.batch_size < 1 or self.eval_batch_size < 1:
            raise ConfigurationError('batch sizes must be >= 1')
        if self.max_epochs < 0:
            raise ConfigurationError(f'max_epochs must be >= 0, got {self.max_epochs}')
        if self.k < 1:
            raise ConfigurationError(f'k must be >= 1, got {self.k}')

    @property
    def bias_enabled(self):
        # leaky_relu(0) = 0 would freeze zero-initialised baskets without a bias
        if self.use_bias is None:
            return self.activation == 'leaky_relu'
        return bool(self.use_bias)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_cfg(cls, cfg):
        method = cfg.method
        adam = method.get('adam', {})
        return cls(
            model_name=method.model_name,
            embedding_dim=int(method.embedding_dim),
            num_layers=int(method.num_layers),
            activation=method.activation,
            use_bias=method.get('use_bias', None),
            precedence=method.get('precedence', 'hadamard_first'),
            learning_rate=float(method.learning_rate),
            lambda_reg=float(method.lambda_reg),
            batch_size=int(method.batch_size),
            max_epochs=int(method.max_epochs),
            patience=int(method.patience),
            beta1=float(adam.get('beta1', 0.9)),
            beta2=float(adam.get('beta2', 0.999)),
            eps=float(adam.get('eps', 1e-8)),
            seed=int(cfg.seed),
            k=int(cfg.eval.k),
            eval_batch_size=int(cfg.eval.batch_size),
            deterministic=bool(cfg.deterministic),
            use_wandb=bool(cfg.get('use_wandb', False)),
            exp_name=str(cfg.get('exp_name', 'basconv')),
        )
