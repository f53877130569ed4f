import torch
import torch.nn as nn
import torch.nn.functional as F


def l2_norm_sq(params):
    return sum((p ** 2).sum() for p in params.parameters())


def bpr_loss(pos_scores, neg_scores, params, lambda_reg):
    """
    -sum log sigmoid(y_pos - y_neg) + lambda * ||Theta||^2, in the softplus form
    log(1 + exp(-(y_pos - y_neg))). Theta is every parameter of `params`.
    """
    if pos_scores.shape != neg_scores.shape:
        raise ValueError(f'Score shapes differ: {tuple(pos_scores.shape)} vs {tuple(neg_scores.shape)}')
    interaction = F.softplus(neg_scores - pos_scores).sum()
    if lambda_reg == 0:
        return interaction
    return interaction + lambda_reg * l2_norm_sq(params)


class BPRCriterion(nn.Module):
    def __init__(self, lambda_reg):
        super(BPRCriterion, self).__init__()
        self.lambda_reg = lambda_reg

    def forward(self, pos_scores, neg_scores, params):
        return bpr_loss(pos_scores, neg_scores, params, self.lambda_reg)
