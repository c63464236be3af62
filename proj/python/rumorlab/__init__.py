"""Rumor detection on message propagation trees, message injection attacks and
influence-guided contrastive training."""

import json as _json

from ._core import (
    ArgumentError,
    AttackError,
    ConfigError,
    DegenerateInputError,
    Label,
    NumericError,
    ParseError,
    PropagationTree,
    ReportError,
    TrainingError,
    corpus_from_json,
    corpus_to_json,
    degree,
    encode_message,
    influence_score,
    rank_by_influence,
    root_homophily,
    sincon_loss,
    tokenize,
)
from . import _core


def _dump(config):
    if config is None:
        return ""
    return config if isinstance(config, str) else _json.dumps(config)


def default_config():
    """Default experiment configuration as a dict."""
    return _json.loads(_core.default_config())


def load_config(path="", overrides=()):
    """Reads a JSON config file and applies "a.b=value" overrides."""
    return _json.loads(_core.load_config(str(path), list(overrides)))


def config_hash(config):
    return _core.config_hash(_dump(config))


def synth_corpus(config=None, seed=None):
    return _core.synth_corpus(_dump(config), seed)


def train_and_evaluate(corpus, config=None, mode="normal", seed=0):
    return _core.train_and_evaluate(corpus, _dump(config), mode, seed)


def attack(params, corpus, config=None, seed=0):
    return _core.attack(params, corpus, _dump(config), seed)


def run_experiment(config=None, seed=1, out_dir=""):
    return _core.run_experiment(_dump(config), seed, str(out_dir))


def report(run_dir):
    """Returns (text, csv) for a verified run directory."""
    return _core.report(str(run_dir))
