# Copyright 2026 The attndrop Authors
# SPDX-License-Identifier: Apache-2.0
"""Attention-weight regularization: top-k hard masking, Gaussian blur of logits,
KL consistency, and the accompanying bound/variance/calibration calculators."""

import json as _json

from ._core import (
    ConfigError,
    DimensionError,
    DomainError,
    IoError,
    KernelTable,
    ParameterError,
    blur,
    consistency_loss,
    default_config,
    ece,
    gaussian_kernel,
    hard_mask,
    kl_gaussian_attention,
    pac_bayes_bound,
    smooth_logits,
    softmax,
    topk,
    variance_decomposition,
)
from ._core import train as _train


def train(config=None):
    """Run one training job. `config` is a dict (or JSON string) using the CLI schema."""
    if config is None:
        config = {}
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _train(config)


__all__ = [
    "ConfigError",
    "DimensionError",
    "DomainError",
    "IoError",
    "KernelTable",
    "ParameterError",
    "blur",
    "consistency_loss",
    "default_config",
    "ece",
    "gaussian_kernel",
    "hard_mask",
    "kl_gaussian_attention",
    "pac_bayes_bound",
    "smooth_logits",
    "softmax",
    "topk",
    "train",
    "variance_decomposition",
]
