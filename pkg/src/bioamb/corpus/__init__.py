"""Bundled example processes (``*.bioamb``)."""

from __future__ import annotations

from importlib import resources

from ..ast import Process
from ..parser import parse


def names() -> list[str]:
    """Stems of the bundled examples, sorted."""
    files = resources.files(__name__).iterdir()
    return sorted(f.name[: -len(".bioamb")] for f in files if f.name.endswith(".bioamb"))


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.bioamb").read_text(encoding="utf-8")


def load(name: str) -> Process:
    return parse(source(name))
