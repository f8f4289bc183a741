"""Bundled grammars and histories (JSON files under ``mvtgg/data``)."""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

from . import io
from .fixtures import ast2cd, ast2cd_ambiguous, diamond_history, example_history

BUNDLED = ("ast2cd", "ast2cd_ambiguous", "diamond", "example")


def load(name: str) -> dict[str, Any]:
    if name not in BUNDLED:
        raise KeyError(f"no bundled document {name!r}; have {', '.join(BUNDLED)}")
    return json.loads(resources.files("mvtgg").joinpath("data").joinpath(f"{name}.json").read_text())


def build(name: str) -> dict[str, Any]:
    """Regenerate a bundled document from the in-code fixtures."""
    if name == "ast2cd":
        return io.tgg_to_doc(ast2cd())
    if name == "ast2cd_ambiguous":
        return io.tgg_to_doc(ast2cd_ambiguous())
    tg = ast2cd().types.source
    if name == "diamond":
        return io.history_to_doc(diamond_history(tg))
    if name == "example":
        return io.history_to_doc(example_history(tg))
    raise KeyError(name)
