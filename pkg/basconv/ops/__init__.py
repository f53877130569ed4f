from .kernels import (DTYPE, DenseMatrix, RngStream, activation, add, as_dense, derive_seed, hadamard, matmul,
                      scale, spmm, xavier_init)

__all__ = [
    'DTYPE', 'DenseMatrix', 'RngStream', 'activation', 'add', 'as_dense', 'derive_seed', 'hadamard', 'matmul',
    'scale', 'spmm', 'xavier_init',
]
