"""The annotated loops from the iteration-contract examples, as ``.loop`` files."""

from __future__ import annotations

from importlib import resources

NAMES = ("listing1", "listing2", "listing3")


def path(name: str):
    return resources.files(__name__) / f"{name}.loop"


def source(name: str) -> str:
    return path(name).read_text(encoding="utf-8")
