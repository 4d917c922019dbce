"""Python access to the biasdetect core."""

import json

from ._biasdetect import (
    DistributionStats,
    Error,
    Lexicon,
    Network,
    StageError,
    accuracy,
    average_ranks,
    contingency,
    fit_stats,
    generalized_weights,
    init_network,
    label_bias,
    load_lexicon,
    parse_lexicon,
    pearson,
    run,
    score_text,
    spearman,
)
from ._biasdetect import synth as _synth
from ._biasdetect import train as _train

__all__ = [
    "DistributionStats",
    "Error",
    "Lexicon",
    "Network",
    "StageError",
    "accuracy",
    "average_ranks",
    "contingency",
    "fit_stats",
    "generalized_weights",
    "init_network",
    "label_bias",
    "load_lexicon",
    "parse_lexicon",
    "pearson",
    "run",
    "score_text",
    "spearman",
    "synth",
    "train",
]


def train(inputs, targets, **config):
    """Train with rprop+; keyword arguments are train config keys.

    Returns (network, sse_history, stop_reason).
    """
    return _train(inputs, targets, json.dumps(config))


def synth(lexicon, out_dir, **config):
    """Write a synthetic population and a ready-to-run pipeline config."""
    return _synth(json.dumps(config), str(lexicon), str(out_dir))
