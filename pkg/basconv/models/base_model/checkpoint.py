"""
`.bcv` checkpoints: a torch-serialised dict carrying the model hyper-parameters,
the parameter state dict, the graph fingerprint, Adam moments and step counter.
"""
import dataclasses
import logging
import os

import torch

from basconv.utils.errors import ArtifactNotFoundError, ConfigurationError, FingerprintMismatchError
from basconv.utils.utils import ARTIFACT_VERSION

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 'basconv-checkpoint'
BEST_CHECKPOINT = 'ckpt-best.bcv'


def checkpoint_name(epoch):
    return f'ckpt-epoch{epoch}.bcv'


def save_checkpoint(path, model, epoch, config_hash=None, best_score=None):
    config = model.config
    payload = {
        'format': CHECKPOINT_FORMAT,
        'version': ARTIFACT_VERSION,
        'model_name': config.model_name,
        'd': config.embedding_dim,
        'L': config.num_layers,
        'activation': config.activation,
        'precedence': config.precedence,
        'use_bias': config.bias_enabled,
        'train_config': dataclasses.asdict(config),
        'state_dict': {k: v.detach().cpu().clone() for k, v in model.params.state_dict().items()},
        'graph_fingerprint': model.split.full_graph.fingerprint(),
        'adam_state': None if model.adam_state is None else model.adam_state.state_dict(),
        'step': 0 if model.adam_state is None else model.adam_state.t,
        'epoch': epoch,
        'config_hash': config_hash,
        'best_score': best_score,
    }
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    torch.save(payload, path)
    return path


def load_checkpoint(path, fingerprint=None):
    """
    Read a checkpoint; with `fingerprint` given, refuse one trained on another graph.
    """
    if not os.path.exists(path):
        raise ArtifactNotFoundError(f'Checkpoint does not exist: {path}')
    payload = torch.load(path, map_location='cpu', weights_only=True)
    if not isinstance(payload, dict) or payload.get('format') != CHECKPOINT_FORMAT:
        raise ConfigurationError(f'Not a BasConv checkpoint: {path}')
    if payload['version'] != ARTIFACT_VERSION:
        raise ConfigurationError(f'Checkpoint version {payload["version"]} is not supported (expected {ARTIFACT_VERSION})')
    if fingerprint is not None and payload['graph_fingerprint'] != fingerprint:
        raise FingerprintMismatchError('Checkpoint {} was trained on graph {} but the prepared graph is {}'.format(
            path, payload['graph_fingerprint'], fingerprint))
    return payload


def restore(model, payload, with_optimizer=True):
    """Load parameters (and Adam state) of a checkpoint into a freshly built model."""
    model.params.load_state_dict(payload['state_dict'])
    model.epoch_offset = int(payload['epoch'])
    if with_optimizer and payload.get('adam_state') is not None:
        model.configure_optimizers()
        model.adam_state.load_state_dict(payload['adam_state'])
    logger.info('Restored %s parameters from epoch %d (step %d)', payload['model_name'], payload['epoch'],
                payload['step'])
    return model
