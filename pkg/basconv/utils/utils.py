import glob
import hashlib
import json
import os
import random
import re

import numpy as np
import pytorch_lightning as pl
import torch

ARTIFACT_VERSION = 1


def find_latest_checkpoint(base_path):
    # Pattern to match the per-epoch checkpoints written by the trainer
    search_pattern = os.path.join(base_path, 'ckpt-epoch*.bcv')
    list_of_files = glob.glob(search_pattern)
    if not list_of_files:
        return None

    def epoch_of(path):
        match = re.search(r'ckpt-epoch(\d+)\.bcv$', path)
        return int(match.group(1)) if match else -1

    # epoch number, not mtime, so reruns resolve the same file
    return max(list_of_files, key=epoch_of)


def set_seed(seed_value=42, deterministic=True):
    """
    Set seed for reproducibility of ingestion, sampling and Lightning training.

    Args:
    seed_value (int): The seed value to be set for random number generators.
    deterministic (bool): Force deterministic torch kernels.
    """
    torch.manual_seed(seed_value)
    np.random.seed(seed_value)
    random.seed(seed_value)
    pl.seed_everything(seed_value, workers=True)
    torch.use_deterministic_algorithms(deterministic)


def sha256_hex(payload, length=16):
    if isinstance(payload, str):
        payload = payload.encode('utf-8')
    return hashlib.sha256(payload).hexdigest()[:length]


def dump_json(obj, path):
    """Write JSON with sorted keys so equal content gives equal bytes."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w') as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write('\n')
