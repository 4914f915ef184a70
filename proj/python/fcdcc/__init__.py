"""Coded distributed convolution with rotation-embedded codes."""

import json

from ._core import (
    ConfigError,
    DecodeInfeasibleError,
    Error,
    LayerDims,
    ParameterError,
    ShapeError,
    StarvationError,
    coded_conv,
    conv3d_ref,
    node_volumes,
    optimize_layer,
    optimize_model,
    registry_layers,
    registry_models,
    stability,
    stability_csv,
    total_cost,
    verify,
)

__all__ = [
    "ConfigError",
    "DecodeInfeasibleError",
    "Error",
    "LayerDims",
    "ParameterError",
    "ShapeError",
    "StarvationError",
    "coded_conv",
    "conv3d_ref",
    "node_volumes",
    "optimize_layer",
    "optimize_model",
    "registry_layers",
    "registry_models",
    "run",
    "stability",
    "stability_csv",
    "total_cost",
    "verify",
]


def run(config):
    """Run a configuration given as a dict, a JSON string, or a path."""
    from ._core import run_config_json

    if isinstance(config, dict):
        return run_config_json(json.dumps(config))
    text = str(config)
    if not text.lstrip().startswith("{"):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    return run_config_json(text)
