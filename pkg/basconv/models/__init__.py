from basconv.models.base_model.checkpoint import load_checkpoint, restore
from basconv.utils.config import TrainConfig
from basconv.utils.errors import ConfigurationError
from .basconv.BasConv import BasConv
from .bpr_mf.BPRMF import BPRMF
from .item_pop.item_pop import ItemPop

__all__ = {
    'basconv': BasConv,
    'bpr_mf': BPRMF,
    'item_pop': ItemPop,
}


def build_model(config, split):
    if config.model_name not in __all__:
        raise ConfigurationError(f'Unknown model: {config.model_name} (choose from {sorted(__all__)})')
    model = __all__[config.model_name](
        config=config,
        split=split,
    )

    return model


def load_model(path, split):
    """Rebuild a trained model from a .bcv checkpoint over the graph it was trained on."""
    payload = load_checkpoint(path, split.full_graph.fingerprint())
    model = build_model(TrainConfig(**payload['train_config']), split)
    return restore(model, payload, with_optimizer=False)
