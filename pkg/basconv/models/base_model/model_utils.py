from dataclasses import dataclass

import numpy as np
import pandas as pd
import torch

from basconv.utils.errors import NonFiniteError
from basconv.utils.metrics import rank_scores


@dataclass
class AdamState:
    """
    torch.optim.Adam over a parameter module plus the global step counter t.
    Moments live in the optimizer state, keyed by parameter and shaped like it.
    """
    optimizer: torch.optim.Adam
    t: int = 0

    @classmethod
    def create(cls, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        optimizer = torch.optim.Adam(params.parameters(), lr=lr, betas=(beta1, beta2), eps=eps, weight_decay=0.0)
        return cls(optimizer=optimizer)

    def moments(self, param):
        state = self.optimizer.state.get(param, {})
        return state.get('exp_avg'), state.get('exp_avg_sq')

    def state_dict(self):
        return {'optimizer': self.optimizer.state_dict(), 't': self.t}

    def load_state_dict(self, state):
        self.optimizer.load_state_dict(state['optimizer'])
        self.t = int(state['t'])


def backward(model, batch, step=None):
    """
    Exact gradients of the BPR loss of one triplet batch, by reverse mode
    through the full-graph forward pass.
    :return: (detached loss, {parameter name: gradient})
    """
    named = list(model.params.named_parameters())
    with torch.enable_grad():
        pos_scores, neg_scores = model.triplet_scores(batch['rows'], batch['pos'], batch['neg'])
        loss = model.criterion(pos_scores, neg_scores, model.params)
        if not torch.isfinite(loss):
            raise NonFiniteError(f'Non-finite loss {loss.item()} at step {step}')
        grads = torch.autograd.grad(loss, [p for _, p in named], allow_unused=True)

    gradients = {}
    for (name, p), g in zip(named, grads):
        g = torch.zeros_like(p) if g is None else g
        if not torch.isfinite(g).all():
            raise NonFiniteError(f'Non-finite gradient in {name} at step {step}')
        gradients[name] = g
    return loss.detach(), gradients


def adam_step(params, grads, state, lr=None, beta1=None, beta2=None, eps=None):
    """
    One bias-corrected Adam update of every parameter in `params` from `grads`.
    Hyper-parameters left as None keep the optimizer's current values.
    """
    for group in state.optimizer.param_groups:
        if lr is not None:
            group['lr'] = lr
        if beta1 is not None or beta2 is not None:
            b1, b2 = group['betas']
            group['betas'] = (b1 if beta1 is None else beta1, b2 if beta2 is None else beta2)
        if eps is not None:
            group['eps'] = eps
    for name, p in params.named_parameters():
        if grads[name].shape != p.shape:
            raise ValueError(f'Gradient for {name} has shape {tuple(grads[name].shape)}, expected {tuple(p.shape)}')
        p.grad = grads[name].detach().clone()
    state.optimizer.step()
    state.optimizer.zero_grad(set_to_none=True)
    state.t += 1
    return params, state


class EmbeddingScorer:
    """
    Scores of every item for a set of baskets from fixed output embeddings:
    e_owner(b) . e_i, plus e_b . e_i when basket embeddings are given.
    """

    def __init__(self, users, items, owner, baskets=None):
        self.users = users.detach()
        self.items = items.detach()
        self.baskets = None if baskets is None else baskets.detach()
        self.owner = torch.as_tensor(owner)

    def components(self, baskets):
        baskets = torch.as_tensor(baskets, dtype=torch.int64)
        user_term = self.users[self.owner[baskets]] @ self.items.T
        if self.baskets is None:
            basket_term = torch.zeros_like(user_term)
        else:
            basket_term = self.baskets[baskets] @ self.items.T
        return user_term.cpu().numpy(), basket_term.cpu().numpy()

    def basket_scores(self, baskets):
        user_term, basket_term = self.components(baskets)
        return user_term + basket_term


def top_k_frame(user_term, basket_term, exclude, k):
    """Ranked items with both score terms; `exclude` never appears, ties go to the lower index."""
    user_term = np.asarray(user_term, dtype=np.float64)
    basket_term = np.asarray(basket_term, dtype=np.float64)
    scores = user_term + basket_term
    top = rank_scores(scores, exclude, k)
    return pd.DataFrame({'rank': np.arange(1, len(top) + 1), 'item': top, 'score': scores[top],
                         'user_term': user_term[top], 'basket_term': basket_term[top]})
