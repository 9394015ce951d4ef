"""Access to the bundled example programs and JSON schemas."""
from __future__ import annotations

import json
from importlib import resources


def corpus_path(name: str):
    """Path of a bundled ``.hpl`` program, e.g. ``corpus_path("card")``."""
    if not name.endswith(".hpl"):
        name += ".hpl"
    return resources.files("hplp") / "corpus" / name


def corpus_names() -> list:
    return sorted(p.name[:-4] for p in (resources.files("hplp") / "corpus").iterdir()
                  if p.name.endswith(".hpl"))


def read_corpus(name: str) -> str:
    return corpus_path(name).read_text(encoding="utf-8")


def schema(name: str) -> dict:
    """One of ``report``, ``bound``, ``estimate``, ``ast``."""
    path = resources.files("hplp") / "schemas" / f"{name}.schema.json"
    return json.loads(path.read_text(encoding="utf-8"))
