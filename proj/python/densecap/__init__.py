"""Dense ReLU networks as computational kernels."""

from ._core import (
    DenseNetwork,
    Error,
    check_equivalence,
    compress,
    compression_hidden_dim_log2,
    deserialize,
    induce_kernel,
    kernel_cut_norm,
    lipschitz_constant,
    make_network,
    param_count,
    random_network,
)

__all__ = [
    "DenseNetwork",
    "Error",
    "check_equivalence",
    "compress",
    "compression_hidden_dim_log2",
    "deserialize",
    "induce_kernel",
    "kernel_cut_norm",
    "lipschitz_constant",
    "make_network",
    "param_count",
    "random_network",
]
