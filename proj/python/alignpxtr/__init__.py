"""Bias-conditional quantile alignment of recommender scores."""

import json

from . import _core
from ._core import (
    ConditionalModel,
    config_fingerprint,
    ks_uniformity,
    mutual_information,
    rank_correlation,
    to_gaussian,
)

__all__ = [
    "ConditionalModel",
    "config_fingerprint",
    "default_config",
    "evaluate",
    "fit",
    "ks_uniformity",
    "mutual_information",
    "pipeline",
    "rank_correlation",
    "simulate",
    "to_gaussian",
    "transform",
]


def _dump(config):
    return config if isinstance(config, str) else json.dumps(config)


def default_config():
    return json.loads(_core.default_config())


def simulate(config, out):
    rows, _ = _core.simulate(_dump(config), str(out))
    return rows


def fit(config, data, models):
    return _core.fit(_dump(config), str(data), str(models))


def transform(config, data, models, out):
    rows, _ = _core.transform(_dump(config), str(data), str(models), str(out))
    return rows


def evaluate(config, data, report, models=None):
    text, _ = _core.evaluate(_dump(config), str(data), str(report), None if models is None else str(models))
    return json.loads(text)


def pipeline(config, out_dir):
    text, _ = _core.pipeline(_dump(config), str(out_dir))
    return json.loads(text)
