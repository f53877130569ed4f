"""
Dense and sparse kernels shared by the model, the trainer and the baselines.

Dense matrices are 2-D float64 torch tensors; sparse operands are
InteractionMatrix instances (CSR on the host, coalesced COO for torch).
"""
import math
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from basconv.utils.errors import ConfigurationError, DimensionError

DTYPE = torch.float64
LEAKY_RELU_SLOPE = 0.2

DenseMatrix = torch.Tensor


def derive_seed(seed, *keys):
    """Independent child seed, stable across platforms."""
    state = np.random.SeedSequence([int(seed), *[int(k) for k in keys]]).generate_state(1, dtype=np.uint32)
    return int(state[0])


@dataclass(frozen=True)
class RngStream:
    """
    Seeded numpy Generator on PCG64 (128-bit LCG state advanced by a fixed
    multiplier/increment, XSL-RR output permutation). The bit stream for a
    seed is identical on every platform numpy supports.
    """
    seed: int
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'generator', np.random.Generator(np.random.PCG64(self.seed)))

    def child(self, *keys):
        return RngStream(derive_seed(self.seed, *keys))


def as_dense(values):
    tensor = torch.as_tensor(values, dtype=DTYPE)
    if tensor.dim() != 2:
        raise DimensionError(f'Expected a 2-D matrix, got shape {tuple(tensor.shape)}')
    return tensor


def _shape(x):
    return tuple(x.shape)


def _check_same_shape(a, b, op):
    if a.shape != b.shape:
        raise DimensionError(f'{op}: shape mismatch {_shape(a)} vs {_shape(b)}')


def spmm(s, d):
    """Sparse (rows x k) times dense (k x cols). Zero rows of s give zero rows."""
    if s.cols != d.shape[0]:
        raise DimensionError(f'spmm: sparse {(s.rows, s.cols)} incompatible with dense {_shape(d)}')
    return torch.sparse.mm(s.torch, d)


def hadamard(a, b):
    _check_same_shape(a, b, 'hadamard')
    return a * b


def matmul(a, b):
    if a.dim() != 2 or b.dim() != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f'matmul: shape mismatch {_shape(a)} @ {_shape(b)}')
    return a @ b


def add(a, b):
    _check_same_shape(a, b, 'add')
    return a + b


def scale(a, c):
    return a * float(c)


def xavier_init(rows, cols, rng):
    """Uniform on [-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))]."""
    if rows < 1 or cols < 1:
        raise DimensionError(f'xavier_init: rows and cols must be >= 1, got {(rows, cols)}')
    bound = math.sqrt(6.0 / (rows + cols))
    values = rng.generator.uniform(-bound, bound, size=(rows, cols))
    return torch.from_numpy(values).to(DTYPE)


def activation(h, kind):
    if kind == 'sigmoid':
        return torch.sigmoid(h)
    if kind == 'leaky_relu':
        return F.leaky_relu(h, negative_slope=LEAKY_RELU_SLOPE)
    raise ConfigurationError(f'Unknown activation: {kind}')
