import json
import logging
import os
import shutil
import time

import pytorch_lightning as pl
import torch
from pytorch_lightning.callbacks import Callback, EarlyStopping
from pytorch_lightning.loggers import WandbLogger
from torch.utils.data import DataLoader, TensorDataset

from basconv.datasets.triplet_dataset import TripletDataset
from basconv.models import ItemPop, build_model
from basconv.models.base_model.base_model import TRIPLET_STREAM
from basconv.models.base_model.checkpoint import BEST_CHECKPOINT, checkpoint_name, load_checkpoint, restore, save_checkpoint
from basconv.ops.kernels import derive_seed
from basconv.utils.config import check_learning_rate
from basconv.utils.utils import ARTIFACT_VERSION, set_seed

logger = logging.getLogger(__name__)

TRAIN_LOG = 'train_log.jsonl'


class EpochLogWriter(Callback):
    """
    One JSON object per epoch: epoch, mean loss, Adam step, validation metrics and the run's
    config hash, seed and artifact version.
    Wall time is written only for non-deterministic runs so deterministic logs compare byte for byte.
    """

    def __init__(self, path=None, deterministic=True, provenance=None):
        self.path = path
        self.deterministic = deterministic
        self.provenance = provenance or {}
        self.records = []
        self._start = None

    def on_train_epoch_start(self, trainer, pl_module):
        self._start = time.perf_counter()

    def on_train_epoch_end(self, trainer, pl_module):
        wall_time = time.perf_counter() - self._start
        record = {'epoch': pl_module.current_epoch_number, 'loss': pl_module.mean_epoch_loss,
                  'step': pl_module.adam_state.t}
        record.update(self.provenance)
        metrics = pl_module.val_metrics
        if metrics is not None:
            record.update(val_recall=metrics.recall_at_k, val_ndcg=metrics.ndcg_at_k, val_hr=metrics.hr_at_k)
        if not self.deterministic:
            record['wall_time'] = wall_time
        self.records.append(record)
        if self.path is not None:
            with open(self.path, 'a') as f:
                f.write(json.dumps(record, sort_keys=True) + '\n')
        logger.info('epoch %d: loss %.6f, val recall@%d %s (%.1fs)', record['epoch'], record['loss'],
                    pl_module.config.k, 'n/a' if metrics is None else f'{metrics.recall_at_k:.4f}', wall_time)


class BcvCheckpoint(Callback):
    """
    Writes ckpt-epoch{N}.bcv every epoch and copies the best one by validation
    recall to ckpt-best.bcv. Without validation the latest epoch is the best.
    The best parameters are also kept in memory.
    """

    def __init__(self, dirpath=None, config_hash=None, best_score=None, best_state=None, best_epoch=None):
        self.dirpath = dirpath
        self.config_hash = config_hash
        self.best_score = best_score
        self.best_epoch = best_epoch
        self.best_state = best_state

    def on_train_epoch_end(self, trainer, pl_module):
        epoch = pl_module.current_epoch_number
        score = None if pl_module.val_metrics is None else pl_module.val_metrics.recall_at_k
        improved = score is None or self.best_score is None or score > self.best_score
        if improved:
            self.best_score, self.best_epoch = score, epoch
            self.best_state = {k: v.detach().clone() for k, v in pl_module.params.state_dict().items()}
        if self.dirpath is None:
            return
        path = save_checkpoint(os.path.join(self.dirpath, checkpoint_name(epoch)), pl_module, epoch,
                               config_hash=self.config_hash, best_score=self.best_score)
        if improved:
            shutil.copyfile(path, os.path.join(self.dirpath, BEST_CHECKPOINT))


def _resumed_best(resume_from, payload, split):
    """
    Best score, parameters and epoch so far, read from the ckpt-best.bcv next to the
    resumed checkpoint. Without one the resumed checkpoint stands in for the best.
    """
    best_path = os.path.join(os.path.dirname(os.path.abspath(resume_from)), BEST_CHECKPOINT)
    if os.path.exists(best_path):
        best = load_checkpoint(best_path, split.full_graph.fingerprint())
    else:
        logger.warning('No %s next to %s, counting the resumed epoch as the best', BEST_CHECKPOINT, resume_from)
        best = payload
    return best.get('best_score'), dict(best['state_dict']), int(best['epoch'])


def train(split, config, out_dir=None, resume_from=None, config_hash=None):
    """
    Fit a model on a within-basket split with BPR and Adam.

    With masked validation items the model is fitted on the training items minus
    the masked ones, validated every epoch on the masked ones, early-stopped on
    validation recall and returned with its best parameters.
    :param split: SplitResult
    :param config: TrainConfig
    :param out_dir: where checkpoints and train_log.jsonl go; nothing is written when None
    :param resume_from: .bcv checkpoint to continue from
    :return: (model, per-epoch history)
    """
    set_seed(config.seed, config.deterministic)
    fit_split = split.validation_view() if split.has_validation else split
    model = build_model(config, fit_split)
    if isinstance(model, ItemPop):
        logger.info('ItemPop has nothing to train')
        return model, []
    check_learning_rate(config.learning_rate)

    best_score, best_state, best_epoch = None, None, None
    if resume_from is not None:
        payload = load_checkpoint(resume_from, split.full_graph.fingerprint())
        restore(model, payload)
        best_score, best_state, best_epoch = _resumed_best(resume_from, payload, split)

    remaining = config.max_epochs - model.epoch_offset
    if remaining <= 0:
        logger.info('No epochs to run (max_epochs=%d, start epoch %d)', config.max_epochs, model.epoch_offset)
        return model, []

    log_path = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        log_path = os.path.join(out_dir, TRAIN_LOG)
        if resume_from is None and os.path.exists(log_path):
            os.remove(log_path)
    provenance = {'config_hash': config_hash, 'seed': config.seed, 'artifact_version': ARTIFACT_VERSION}
    log_writer = EpochLogWriter(log_path, config.deterministic, provenance)
    checkpoint = BcvCheckpoint(out_dir, config_hash, best_score, best_state, best_epoch)
    call_backs = [log_writer, checkpoint]

    train_set = TripletDataset(fit_split, config.batch_size, derive_seed(config.seed, TRIPLET_STREAM),
                               level=model.triplet_level, start_epoch=model.epoch_offset)
    train_loader = DataLoader(train_set, batch_size=None)

    val_loader = None
    if split.has_validation:
        val_set = TensorDataset(torch.from_numpy(fit_split.evaluation_baskets))
        val_loader = DataLoader(val_set, batch_size=config.eval_batch_size, shuffle=False, drop_last=False)
        call_backs.append(EarlyStopping(monitor='val/recall', mode='max', patience=config.patience,
                                        check_on_train_epoch_end=False))

    trainer = pl.Trainer(
        max_epochs=remaining,
        logger=WandbLogger(project='basconv', name=config.exp_name) if config.use_wandb else False,
        accelerator='cpu',
        devices=1,
        precision='64-true',
        deterministic=config.deterministic,
        callbacks=call_backs,
        enable_checkpointing=False,
        enable_progress_bar=False,
        enable_model_summary=False,
        num_sanity_val_steps=0,
        default_root_dir=out_dir,
    )
    trainer.fit(model=model, train_dataloaders=train_loader, val_dataloaders=val_loader)

    if split.has_validation and checkpoint.best_state is not None:
        model.params.load_state_dict(checkpoint.best_state)
        logger.info('Best validation recall %.4f at epoch %d', checkpoint.best_score, checkpoint.best_epoch)
    return model, log_writer.records
