"""Twin-beam intensity-noise simulation and conditional selection."""

import json

from ._core import *  # noqa: F401,F403
from ._core import __version__, _analyze_json, _run_scenario_json


def run_scenario(config):
    """Run a scenario from a config dict or JSON text; returns the report as a dict."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_run_scenario_json(text))


def analyze(trace, shot_variance=1.0, center=0.0, half_widths=(), bin_width=0.5):
    """Full noise report on a trace, as a dict."""
    return json.loads(
        _analyze_json(trace, shot_variance, center, list(half_widths), bin_width))
