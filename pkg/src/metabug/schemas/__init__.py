"""Bundled JSON Schemas for every document the pipeline reads or writes.

Names: corpus-manifest, truth, model-params, detect-report, trace-report,
eval-metrics.  The CLI does not validate at runtime (keeping the runtime
dependency-free); the schemas ship so tests and downstream consumers can.
"""

from __future__ import annotations

import json
from importlib import resources

NAMES = (
    "corpus-manifest",
    "truth",
    "model-params",
    "detect-report",
    "trace-report",
    "eval-metrics",
)


def load_schema(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(f"unknown schema {name!r}; expected one of {NAMES}")
    text = resources.files(__package__).joinpath(f"{name}.json").read_text()
    return json.loads(text)
