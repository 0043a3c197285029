"""Analytical simulation and design space exploration for array-based DNN
accelerators.

The heavy lifting happens in the compiled ``_core`` module; these wrappers
decode its structured results into plain Python objects.
"""

import csv as _csv
import io as _io
import json as _json

from ._core import (  # noqa: F401
    AcceleratorConfig,
    NetworkTopology,
    ParseError,
    SimulationError,
    ValidationError,
    __version__,
    bnb_partition,
    builtin,
    builtin_names,
    config_hash,
    default_config,
    dp_partition,
    load_config,
    parse_network,
    validate_config,
)

from . import _core


def _as_network(net):
    """Accept a NetworkTopology, a built-in name, or topology JSON text."""
    if isinstance(net, NetworkTopology):
        return net
    if isinstance(net, str):
        text = net.lstrip()
        if text.startswith("{"):
            return parse_network(net)
        return builtin(net)
    raise TypeError("expected a NetworkTopology, built-in name or JSON text")


def _as_config(config):
    if config is None:
        return default_config()
    if isinstance(config, AcceleratorConfig):
        return config
    if isinstance(config, str):
        return load_config(config)
    raise TypeError("expected an AcceleratorConfig or config JSON text")


def shapes(net):
    """Per-layer output shapes as a list of dicts."""
    return _json.loads(_core.shapes_json(_as_network(net)))


def simulate(net, config=None):
    """Simulate a network; returns the full report as a dict."""
    return _json.loads(_core.simulate_json(_as_network(net), _as_config(config)))


def sweep(net, config=None, jobs=1):
    """Evaluate the default design space; returns a list of row dicts."""
    text = _core.sweep_csv(_as_network(net), _as_config(config), jobs)
    rows = [line for line in text.splitlines() if not line.startswith("#")]
    out = []
    for row in _csv.DictReader(_io.StringIO("\n".join(rows))):
        out.append(
            {
                "network": row["network"],
                "gb_psum_kb": float(row["gb_psum_kb"]),
                "gb_ifmap_kb": float(row["gb_ifmap_kb"]),
                "array": (int(row["array_rows"]), int(row["array_cols"])),
                "energy": float(row["energy"]),
                "latency": float(row["latency"]),
                "edp": float(row["edp"]),
            }
        )
    return out


def metrics(net, config=None, epsilon=0.05, objective="edp", jobs=1):
    """Sweep distance metrics and the near-optimal set, as a dict."""
    return _json.loads(
        _core.metrics_json(_as_network(net), _as_config(config), epsilon, objective, jobs)
    )


def recommend(names, config=None, epsilon=0.05, objective="edp", max_cores=4, jobs=1):
    """Smallest core set covering the named built-in networks, as a dict."""
    return _json.loads(
        _core.recommend_json(list(names), _as_config(config), epsilon, objective, max_cores, jobs)
    )


def partition(net, cores, config=None):
    """Pipeline partition of a network over `cores` stages, as a dict."""
    return _json.loads(
        _core.partition_json(_as_network(net), _as_config(config), cores)
    )
