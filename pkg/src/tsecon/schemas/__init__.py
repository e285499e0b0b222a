"""Bundled JSON schemas for the machine-readable CLI payloads.

Every ``--format json`` run emits an envelope ``{"command": ..., ...}``;
``load(command)`` returns the schema that envelope validates against.
"""
from __future__ import annotations

import json
from importlib import resources

# armax shares the arima envelope
_ALIASES = {"armax": "arima"}

COMMANDS = ("correlogram", "arima", "armax", "varma", "var", "adf",
            "coint", "garch", "kalman", "evaluate")


def load(command: str) -> dict:
    """Return the JSON schema (as a dict) for one CLI command."""
    if command not in COMMANDS:
        raise KeyError(f"no schema for command {command!r}")
    name = _ALIASES.get(command, command)
    ref = resources.files(__package__).joinpath(f"{name}.json")
    with ref.open("r", encoding="utf-8") as fh:
        return json.load(fh)
