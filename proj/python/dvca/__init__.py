"""Python access to the dvca core: run scenarios and attribute violations."""

import json

from . import _dvca
from ._dvca import DvcaError, NoViolation, Unattributable, box_distance, reduction_rate, tarantula

__all__ = [
    "DvcaError",
    "NoViolation",
    "Unattributable",
    "attribute",
    "box_distance",
    "reduction_rate",
    "run",
    "tarantula",
]


def _oracle(oracle):
    return json.dumps(oracle) if oracle else ""


def run(scenario, fault=None, oracle=None):
    """Run a scenario file, optionally with a fault file. Returns a dict."""
    return json.loads(_dvca.run(str(scenario), str(fault or ""), _oracle(oracle)))


def attribute(scenario, fault=None, strategy="binary", audit=False, oracle=None):
    """Attribute the violation of a scenario run to a component and message."""
    return json.loads(_dvca.attribute(str(scenario), str(fault or ""), strategy, audit, _oracle(oracle)))
