import numpy as np
import pytorch_lightning as pl

from basconv.datasets.triplet_dataset import BASKET_LEVEL
from basconv.models.base_model.loss_utils import BPRCriterion
from basconv.models.base_model.model_utils import AdamState, adam_step, backward
from basconv.utils.metrics import basket_metrics, summarize

# child streams of RngStream(config.seed)
INIT_STREAM = 0
TRIPLET_STREAM = 1


class BaseRecommender(pl.LightningModule):
    """
    BPR-trained recommender over a within-basket split.

    Subclasses set `self.params` (an nn.Module holding every trainable tensor)
    and implement `triplet_scores` and `scorer`. Optimisation is manual: every
    batch runs one full forward, exact reverse-mode gradients and one Adam step.
    """
    triplet_level = BASKET_LEVEL

    def __init__(self, config, split):
        super().__init__()
        self.config = config
        self.split = split
        self.automatic_optimization = False
        self.criterion = BPRCriterion(config.lambda_reg)

        self.adam_state = None
        self.epoch_offset = 0
        self.epoch_losses = []
        self.val_rows = []
        self.val_scorer = None
        self.val_metrics = None

    def triplet_scores(self, rows, pos, neg):
        """
        :return: (positive scores, negative scores) with gradient
        """
        raise NotImplementedError

    def scorer(self, graph=None):
        """
        Scorer over `graph` (the fitted graph when None) with
        `basket_scores(baskets) -> (len(baskets), n_items)`.
        """
        raise NotImplementedError

    def configure_optimizers(self):
        if self.adam_state is None:
            self.adam_state = AdamState.create(self.params, self.config.learning_rate, self.config.beta1,
                                               self.config.beta2, self.config.eps)
        return self.adam_state.optimizer

    def on_train_epoch_start(self):
        self.epoch_losses = []
        self.val_metrics = None

    def training_step(self, batch, batch_idx):
        loss, grads = backward(self, batch, step=self.adam_state.t)
        adam_step(self.params, grads, self.adam_state)
        self.epoch_losses.append(loss.item())
        self.log('train/loss', loss.item(), on_step=False, on_epoch=True, batch_size=len(batch['rows']))
        return loss

    @property
    def mean_epoch_loss(self):
        return float(np.mean(self.epoch_losses)) if self.epoch_losses else float('nan')

    @property
    def current_epoch_number(self):
        """1-based epoch count across resumed runs."""
        return self.epoch_offset + self.current_epoch + 1

    def on_validation_epoch_start(self):
        self.val_scorer = self.scorer()
        self.val_rows = []

    def validation_step(self, batch, batch_idx):
        baskets = batch[0].cpu().numpy()
        self.val_rows.extend(basket_metrics(self.val_scorer, self.split, baskets, self.config.k))

    def on_validation_epoch_end(self):
        metrics, _ = summarize(self.val_rows, self.config.k)
        self.val_metrics = metrics
        self.log('val/recall', metrics.recall_at_k)
        self.log('val/ndcg', metrics.ndcg_at_k)
        self.log('val/hr', metrics.hr_at_k)
        self.val_scorer = None
        self.val_rows = []
